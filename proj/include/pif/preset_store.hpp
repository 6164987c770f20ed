#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pif/pcturb.hpp"

namespace pif {

/// Names are 1-64 characters of [A-Za-z0-9_.-] and may not start with a dot.
bool valid_preset_name(std::string_view name) noexcept;

/// Directory of `<name>.json` files with an in-memory index. Thread-safe; mutations
/// are serialized and written through a temporary file and a rename.
class PresetStore {
 public:
  /// Creates the directory when missing and indexes every decodable preset in it.
  /// Files that fail to decode are skipped.
  explicit PresetStore(std::filesystem::path directory);

  std::vector<std::string> names() const;
  std::optional<StylePreset> get(const std::string& name) const;
  /// The stored bytes, exactly as written.
  std::optional<std::string> get_json(const std::string& name) const;

  /// Stores under preset.name. Returns true when a preset was replaced.
  /// InvalidArgument for a bad name, Conflict when it exists and !overwrite.
  bool put(const StylePreset& preset, bool overwrite);

  /// Returns false when no such preset exists.
  bool remove(const std::string& name);

  const std::filesystem::path& directory() const noexcept { return dir_; }

 private:
  std::filesystem::path path_of(const std::string& name) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> index_;  // name -> encoded JSON
};

}  // namespace pif
