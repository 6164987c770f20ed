#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>

#include "pif/image.hpp"

namespace pif {

/// The eight photographic concepts; ordinals run 1..8 in application order.
enum class ConceptId : int {
  Sharpness = 1,
  Vignetting = 2,
  Saturation = 3,
  Tint = 4,
  Exposure = 5,
  Contrast = 6,
  Highlight = 7,
  Shadow = 8,
};

inline constexpr std::size_t kConceptCount = 8;
inline constexpr std::array<ConceptId, kConceptCount> kAllConcepts = {
    ConceptId::Sharpness, ConceptId::Vignetting, ConceptId::Saturation, ConceptId::Tint,
    ConceptId::Exposure,  ConceptId::Contrast,   ConceptId::Highlight,  ConceptId::Shadow};

constexpr int ordinal(ConceptId id) noexcept { return static_cast<int>(id); }
constexpr std::size_t index_of(ConceptId id) noexcept {
  return static_cast<std::size_t>(static_cast<int>(id) - 1);
}
std::string_view concept_name(ConceptId id) noexcept;
std::optional<ConceptId> concept_from_name(std::string_view name) noexcept;

/// Tint, highlight and shadow are StrengthHue; the other five are Scalar.
constexpr bool is_hue_concept(ConceptId id) noexcept {
  return id == ConceptId::Tint || id == ConceptId::Highlight || id == ConceptId::Shadow;
}

struct Scalar {
  double xi = 0.0;  ///< [-1, 1]
  bool operator==(const Scalar&) const = default;
};

struct StrengthHue {
  double strength = 0.0;  ///< [0, 1]
  double hue = 0.0;       ///< [0, 1), circular
  bool operator==(const StrengthHue&) const = default;
};

using ConceptValue = std::variant<Scalar, StrengthHue>;

bool is_neutral(const ConceptValue& value) noexcept;

struct ConceptThresholds {
  double tau_highlight = 0.7;
  double tau_shadow = 0.3;
  int sharpness_kernel = 11;

  /// Throws OutOfRange unless 0 < tau_shadow < tau_highlight < 1 and the kernel is odd.
  void validate() const;
  bool operator==(const ConceptThresholds&) const = default;
};

/// One value per concept.
struct ConceptParams {
  double sharpness = 0.0;
  double vignetting = 0.0;
  double saturation = 0.0;
  StrengthHue tint;
  double exposure = 0.0;
  double contrast = 0.0;
  StrengthHue highlight;
  StrengthHue shadow;

  ConceptValue get(ConceptId id) const noexcept;
  /// Throws TypeMismatch when the alternative does not match the concept.
  void set(ConceptId id, const ConceptValue& value);

  /// Throws OutOfRange when any component is outside its legal range.
  void validate() const;
  bool operator==(const ConceptParams&) const = default;
};

ConceptParams neutral_params() noexcept;

/// Wraps a hue into [0, 1).
double wrap_hue(double h) noexcept;
/// Signed shortest-arc offset from `from` to `to`, in (-0.5, 0.5]; ties go toward increasing hue.
double hue_offset(double from, double to) noexcept;
/// Moves `h` toward `target` by `fraction` of the shortest arc.
double blend_hue(double h, double target, double fraction) noexcept;
/// Absolute circular distance in [0, 0.5].
double hue_distance(double a, double b) noexcept;

/// Target colors for highlight and shadow toning.
Rgb highlight_color(double hue) noexcept;
Rgb shadow_color(double hue) noexcept;

/// Applies one concept's adjustment. Returns the input unchanged at the neutral value.
RasterImage adjust(ConceptId concept_id, const RasterImage& img, const ConceptValue& value,
                   const ConceptThresholds& thresholds = {});

/// Unnormalized weight map as printed (W6 may be negative).
ScalarField raw_weight_map(ConceptId concept_id, const RasterImage& img,
                           const ConceptThresholds& thresholds = {});

/// Weight map in [0,1]: raw map clamped below at 0 then divided by its maximum
/// (maps whose peak is at most 1e-12 become all zero). W4 is all ones.
ScalarField weight_map(ConceptId concept_id, const RasterImage& img,
                       const ConceptThresholds& thresholds = {});

/// Clamp-below-at-zero then max normalization, in place.
void normalize_weight(ScalarField& field) noexcept;

}  // namespace pif
