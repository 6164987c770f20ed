#include "pif/preset_store.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "pif/error.hpp"

namespace pif {

bool valid_preset_name(std::string_view name) noexcept {
  if (name.empty() || name.size() > 64 || name.front() == '.') return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

PresetStore::PresetStore(std::filesystem::path directory) : dir_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create preset directory " + dir_.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const std::string name = entry.path().stem().string();
    if (!valid_preset_name(name)) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      const StylePreset p = decode_preset(buf.str());
      if (p.name == name) index_[name] = buf.str();
    } catch (const Error&) {
    }
  }
}

std::filesystem::path PresetStore::path_of(const std::string& name) const {
  return dir_ / (name + ".json");
}

std::vector<std::string> PresetStore::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : index_) out.push_back(name);
  return out;
}

std::optional<std::string> PresetStore::get_json(const std::string& name) const {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<StylePreset> PresetStore::get(const std::string& name) const {
  auto json = get_json(name);
  if (!json) return std::nullopt;
  return decode_preset(*json);
}

bool PresetStore::put(const StylePreset& preset, bool overwrite) {
  if (!valid_preset_name(preset.name)) {
    throw Error(ErrorCode::InvalidArgument, "invalid preset name '" + preset.name + "'");
  }
  const std::string json = encode_preset(preset);
  std::lock_guard lock(mutex_);
  const bool exists = index_.count(preset.name) != 0;
  if (exists && !overwrite) {
    throw Error(ErrorCode::Conflict, "preset '" + preset.name + "' already exists");
  }
  const auto target = path_of(preset.name);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << json;
    if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot write " + target.string());
  index_[preset.name] = json;
  return exists;
}

bool PresetStore::remove(const std::string& name) {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(name);
  if (it == index_.end()) return false;
  std::error_code ec;
  std::filesystem::remove(path_of(name), ec);
  if (ec) throw Error(ErrorCode::Io, "cannot delete preset '" + name + "'");
  index_.erase(it);
  return true;
}

}  // namespace pif
