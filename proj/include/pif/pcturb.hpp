#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pif/concepts.hpp"
#include "pif/image.hpp"

namespace pif {

/// Subset of the eight concepts.
class ConceptMask {
 public:
  constexpr ConceptMask() = default;
  ConceptMask(std::initializer_list<ConceptId> ids) {
    for (ConceptId id : ids) insert(id);
  }

  static constexpr ConceptMask none() { return ConceptMask(); }
  static constexpr ConceptMask all() { return from_bits(0xFFu); }
  /// Bit (ordinal - 1) selects a concept.
  static constexpr ConceptMask from_bits(unsigned bits) {
    ConceptMask m;
    m.bits_ = bits & 0xFFu;
    return m;
  }

  constexpr bool contains(ConceptId id) const { return (bits_ >> index_of(id)) & 1u; }
  constexpr void insert(ConceptId id) { bits_ |= 1u << index_of(id); }
  constexpr void erase(ConceptId id) { bits_ &= ~(1u << index_of(id)); }
  constexpr unsigned bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<ConceptId> members() const;

  constexpr bool operator==(const ConceptMask&) const = default;

 private:
  unsigned bits_ = 0;
};

/// Applies concepts 1..8 in ordinal order; masks and means are recomputed per stage.
RasterImage perturb(const RasterImage& img, const ConceptParams& params,
                    const ConceptThresholds& thresholds = {});

/// Applies stages `first`..8 only. perturb_from(img, p, Sharpness) == perturb(img, p).
RasterImage perturb_from(const RasterImage& img, const ConceptParams& params, ConceptId first,
                         const ConceptThresholds& thresholds = {});

/// Applies stages 1..`last` only.
RasterImage perturb_through(const RasterImage& img, const ConceptParams& params,
                            ConceptId last, const ConceptThresholds& thresholds = {});

/// Params with every concept outside `mask` set to neutral.
ConceptParams restrict_params(const ConceptParams& params, ConceptMask mask);

RasterImage perturb_masked(const RasterImage& img, const ConceptParams& params,
                           ConceptMask mask, const ConceptThresholds& thresholds = {});

/// Targets and clamps of the neutral anchor.
struct NeutralTargets {
  double mean_luminance = 0.5;
  double luminance_std = 0.18;
  double white_balance_gain_min = 0.5;
  double white_balance_gain_max = 2.0;
  double exposure_gain_min = 0.25;
  double exposure_gain_max = 4.0;
  double contrast_gain_min = 0.5;
  double contrast_gain_max = 2.0;
};

/// Gray-world white balance, then exposure to mean luminance 0.5, then contrast to
/// luminance std 0.18, clamping after each step. DegenerateImage for constant input.
RasterImage neutralize(const RasterImage& img, const NeutralTargets& targets = {});

bool is_constant_image(const RasterImage& img) noexcept;

struct FitMeta {
  std::vector<std::string> reference_digests;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool operator==(const FitMeta&) const = default;
};

struct StylePreset {
  std::string name;
  std::string created_at;  ///< RFC 3339, UTC
  ConceptParams params;
  ConceptThresholds thresholds;
  std::optional<FitMeta> fit_meta;
  bool operator==(const StylePreset&) const = default;
};

enum class ApplyMode { Absolute, Relative };

std::string_view mode_name(ApplyMode mode) noexcept;
std::optional<ApplyMode> mode_from_name(std::string_view name) noexcept;

/// Absolute renders onto neutralize(content); relative renders onto content directly.
RasterImage apply_style(const RasterImage& content, const StylePreset& preset,
                        ApplyMode mode = ApplyMode::Absolute,
                        ConceptMask mask = ConceptMask::all());

inline constexpr int kPresetVersion = 1;

/// Canonical JSON with fixed key order.
std::string encode_preset(const StylePreset& preset);
/// Schema, VersionMismatch or OutOfRange on invalid input.
StylePreset decode_preset(std::string_view json);

/// The "params" object of the preset schema on its own.
std::string encode_params(const ConceptParams& params);
ConceptParams decode_params(std::string_view json);

/// RFC 3339 UTC timestamp for a count of seconds since the Unix epoch.
std::string format_rfc3339(std::int64_t unix_seconds);
std::string now_rfc3339();
/// SOURCE_DATE_EPOCH when set, otherwise the newest modification time among
/// `inputs`, otherwise the current time.
std::string reproducible_created_at(const std::vector<std::filesystem::path>& inputs);

}  // namespace pif
