#include "pif/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pif/error.hpp"
#include "pif/kernels.hpp"
#include "stages.hpp"

namespace pif {
namespace {

constexpr std::array<std::string_view, kConceptCount> kNames = {
    "sharpness", "vignetting", "saturation", "tint",
    "exposure",  "contrast",   "highlight",  "shadow"};

void require_range(double v, double lo, double hi, std::string_view what) {
  if (!std::isfinite(v) || v < lo || v > hi) {
    throw Error(ErrorCode::OutOfRange, std::string(what) + " = " + std::to_string(v) +
                                           " outside [" + std::to_string(lo) + ", " +
                                           std::to_string(hi) + "]");
  }
}

void require_hue(double v, std::string_view what) {
  if (!std::isfinite(v) || v < 0.0 || v >= 1.0) {
    throw Error(ErrorCode::OutOfRange, std::string(what) + " hue outside [0, 1)");
  }
}

void validate_value(ConceptId id, const ConceptValue& value) {
  const std::string_view name = concept_name(id);
  if (is_hue_concept(id)) {
    const auto* sh = std::get_if<StrengthHue>(&value);
    if (!sh) {
      throw Error(ErrorCode::TypeMismatch,
                  std::string(name) + " takes a strength/hue value");
    }
    require_range(sh->strength, 0.0, 1.0, name);
    require_hue(sh->hue, name);
  } else {
    const auto* s = std::get_if<Scalar>(&value);
    if (!s) throw Error(ErrorCode::TypeMismatch, std::string(name) + " takes a scalar value");
    require_range(s->xi, -1.0, 1.0, name);
  }
}

// Pixels move toward `color` by strength * W, with W the max-normalized raw weight
// computed from luminance by `raw`.
template <typename Raw>
void tone_toward(double* px, std::size_t n, std::vector<double>& field, double strength,
                 Rgb color, Raw&& raw) {
  const auto& k = kernels::active();
  field.resize(n);
  k.luminance_rgb(px, field.data(), n);
  double peak = 0.0;
  for (double& v : field) {
    v = std::max(raw(v), 0.0);
    peak = std::max(peak, v);
  }
  if (peak <= 0.0) return;
  k.tone_toward_rgb(px, px, field.data(), peak, strength, color.data(), n);
}

void vignette_weight(std::size_t w, std::size_t h, std::vector<double>& out) {
  out.resize(w * h);
  const double denom = static_cast<double>(w * w + h * h);
  double peak = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    const double di = 2.0 * static_cast<double>(i) - static_cast<double>(h);
    for (std::size_t x = 0; x < w; ++x) {
      const double dk = 2.0 * static_cast<double>(x) - static_cast<double>(w);
      const double v = (di * di + dk * dk) / denom;
      out[i * w + x] = v;
      peak = std::max(peak, v);
    }
  }
  if (peak > 0.0) {
    for (double& v : out) v /= peak;
  }
}

}  // namespace

std::string_view concept_name(ConceptId id) noexcept { return kNames[index_of(id)]; }

std::optional<ConceptId> concept_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kConceptCount; ++i) {
    if (kNames[i] == name) return kAllConcepts[i];
  }
  return std::nullopt;
}

bool is_neutral(const ConceptValue& value) noexcept {
  if (const auto* s = std::get_if<Scalar>(&value)) return s->xi == 0.0;
  return std::get<StrengthHue>(value).strength == 0.0;
}

void ConceptThresholds::validate() const {
  if (!(tau_shadow > 0.0 && tau_shadow < tau_highlight && tau_highlight < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "thresholds require 0 < tau_shadow < tau_highlight < 1");
  }
  if (sharpness_kernel < 1 || sharpness_kernel % 2 == 0) {
    throw Error(ErrorCode::OutOfRange, "sharpness kernel must be odd and positive");
  }
}

ConceptValue ConceptParams::get(ConceptId id) const noexcept {
  switch (id) {
    case ConceptId::Sharpness: return Scalar{sharpness};
    case ConceptId::Vignetting: return Scalar{vignetting};
    case ConceptId::Saturation: return Scalar{saturation};
    case ConceptId::Tint: return tint;
    case ConceptId::Exposure: return Scalar{exposure};
    case ConceptId::Contrast: return Scalar{contrast};
    case ConceptId::Highlight: return highlight;
    case ConceptId::Shadow: return shadow;
  }
  return Scalar{};
}

void ConceptParams::set(ConceptId id, const ConceptValue& value) {
  if (is_hue_concept(id) != std::holds_alternative<StrengthHue>(value)) {
    throw Error(ErrorCode::TypeMismatch,
                std::string("value type does not match concept ") +
                    std::string(concept_name(id)));
  }
  switch (id) {
    case ConceptId::Sharpness: sharpness = std::get<Scalar>(value).xi; break;
    case ConceptId::Vignetting: vignetting = std::get<Scalar>(value).xi; break;
    case ConceptId::Saturation: saturation = std::get<Scalar>(value).xi; break;
    case ConceptId::Tint: tint = std::get<StrengthHue>(value); break;
    case ConceptId::Exposure: exposure = std::get<Scalar>(value).xi; break;
    case ConceptId::Contrast: contrast = std::get<Scalar>(value).xi; break;
    case ConceptId::Highlight: highlight = std::get<StrengthHue>(value); break;
    case ConceptId::Shadow: shadow = std::get<StrengthHue>(value); break;
  }
}

void ConceptParams::validate() const {
  for (ConceptId id : kAllConcepts) validate_value(id, get(id));
}

ConceptParams neutral_params() noexcept { return ConceptParams{}; }

double wrap_hue(double h) noexcept {
  h -= std::floor(h);
  return h >= 1.0 ? 0.0 : h;
}

double hue_offset(double from, double to) noexcept {
  double d = wrap_hue(to) - wrap_hue(from);
  if (d > 0.5) d -= 1.0;
  if (d <= -0.5) d += 1.0;
  return d;
}

double blend_hue(double h, double target, double fraction) noexcept {
  return wrap_hue(h + fraction * hue_offset(h, target));
}

double hue_distance(double a, double b) noexcept { return std::abs(hue_offset(a, b)); }

Rgb highlight_color(double hue) noexcept { return hsv_to_rgb(hue, 0.6, 0.9); }
Rgb shadow_color(double hue) noexcept { return hsv_to_rgb(hue, 0.6, 0.25); }

RasterImage adjust(ConceptId concept_id, const RasterImage& img, const ConceptValue& value,
                   const ConceptThresholds& thresholds) {
  validate_value(concept_id, value);
  if (is_neutral(value)) return img;
  std::vector<double> px(img.samples().begin(), img.samples().end());
  detail::StageScratch scratch;
  detail::adjust_in_place(concept_id, px.data(), img.width(), img.height(), value, thresholds,
                          scratch);
  return RasterImage::trusted(img.width(), img.height(), std::move(px));
}

namespace detail {

void blur_rgb(const double* in, double* out, std::vector<double>& tmp, std::size_t width,
              std::size_t height, int kernel_size) {
  const std::vector<double> taps = gaussian_taps(kernel_size);
  const std::size_t n = 3 * width * height;
  if (kernel_size == 1) {
    std::copy(in, in + n, out);
    return;
  }
  const auto& k = kernels::active();
  const std::size_t radius = taps.size() / 2;
  tmp.resize(n);
  k.convolve_rows(in, tmp.data(), width, height, 3, taps.data(), radius);
  k.convolve_cols(tmp.data(), out, 3 * width, height, taps.data(), radius);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(out[i], 0.0, 1.0);
}

void adjust_in_place(ConceptId id, double* px, std::size_t width, std::size_t height,
                     const ConceptValue& value, const ConceptThresholds& thresholds,
                     StageScratch& scratch) {
  const auto& k = kernels::active();
  const std::size_t n = width * height;

  switch (id) {
    case ConceptId::Sharpness: {
      const double xi = std::get<Scalar>(value).xi;
      const double* blurred = nullptr;
      if (scratch.known_blur) {
        blurred = scratch.known_blur->data();
      } else {
        scratch.blur.resize(3 * n);
        blur_rgb(px, scratch.blur.data(), scratch.tmp, width, height, thresholds.sharpness_kernel);
        blurred = scratch.blur.data();
      }
      k.unsharp_clamp(px, blurred, px, 3 * n, xi);
      return;
    }
    case ConceptId::Vignetting: {
      const double xi = std::get<Scalar>(value).xi;
      if (scratch.vignette_width != width || scratch.vignette_height != height) {
        vignette_weight(width, height, scratch.vignette);
        scratch.vignette_width = width;
        scratch.vignette_height = height;
      }
      k.weighted_gain_clamp_rgb(px, px, scratch.vignette.data(), n, xi);
      return;
    }
    case ConceptId::Saturation: {
      k.saturation_scale_rgb(px, px, n, 1.0 + std::get<Scalar>(value).xi);
      return;
    }
    case ConceptId::Tint: {
      const auto [strength, target] = std::get<StrengthHue>(value);
      k.hue_shift_rgb(px, px, n, strength, target);
      return;
    }
    case ConceptId::Exposure: {
      const double g = 1.0 + std::get<Scalar>(value).xi;
      const double pivot[3] = {0.0, 0.0, 0.0};
      const double gain[3] = {g, g, g};
      k.affine_clamp_rgb(px, px, n, pivot, gain);
      return;
    }
    case ConceptId::Contrast: {
      const double g = 1.0 + std::get<Scalar>(value).xi;
      double sums[3];
      k.channel_sums_rgb(px, n, sums);
      const double count = static_cast<double>(n);
      const double mean[3] = {sums[0] / count, sums[1] / count, sums[2] / count};
      const double gain[3] = {g, g, g};
      k.affine_clamp_rgb(px, px, n, mean, gain);
      return;
    }
    case ConceptId::Highlight: {
      const auto [strength, hue] = std::get<StrengthHue>(value);
      const double tau = thresholds.tau_highlight;
      tone_toward(px, n, scratch.field, strength, highlight_color(hue),
                  [tau](double l) { return (l - tau) / (1.0 - tau); });
      return;
    }
    case ConceptId::Shadow: {
      const auto [strength, hue] = std::get<StrengthHue>(value);
      const double tau = thresholds.tau_shadow;
      tone_toward(px, n, scratch.field, strength, shadow_color(hue),
                  [tau](double l) { return (tau - l) / tau; });
      return;
    }
  }
}

void run_stages_in_place(double* px, std::size_t width, std::size_t height,
                         const ConceptParams& params, int first, int last,
                         const ConceptThresholds& thresholds, StageScratch& scratch) {
  for (int ord = first; ord <= last; ++ord) {
    const auto id = static_cast<ConceptId>(ord);
    const ConceptValue value = params.get(id);
    if (is_neutral(value)) continue;
    adjust_in_place(id, px, width, height, value, thresholds, scratch);
  }
}

}  // namespace detail

ScalarField raw_weight_map(ConceptId concept_id, const RasterImage& img,
                           const ConceptThresholds& thresholds) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  switch (concept_id) {
    case ConceptId::Sharpness: {
      ScalarField g = gradient_magnitude(img);
      const double mean = g.mean();
      for (double& v : g.values()) v = std::abs(v - mean);
      return g;
    }
    case ConceptId::Vignetting: {
      ScalarField out(w, h);
      const double denom = static_cast<double>(w * w + h * h);
      for (std::size_t i = 0; i < h; ++i) {
        const double di = 2.0 * static_cast<double>(i) - static_cast<double>(h);
        for (std::size_t x = 0; x < w; ++x) {
          const double dk = 2.0 * static_cast<double>(x) - static_cast<double>(w);
          out.at(x, i) = (di * di + dk * dk) / denom;
        }
      }
      return out;
    }
    case ConceptId::Saturation: {
      const HsvImage hsv = to_hsv(img);
      ScalarField s(w, h);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = hsv.saturation(i);
      const double mean = s.mean();
      for (double& v : s.values()) v = std::abs(v - mean);
      return s;
    }
    case ConceptId::Tint:
      return ScalarField(w, h, 1.0);
    case ConceptId::Exposure: {
      ScalarField l = luminance(img);
      const double mean = l.mean();
      for (double& v : l.values()) v = std::abs(v - mean);
      return l;
    }
    case ConceptId::Contrast: {
      ScalarField l = luminance(img);
      const auto [lo_it, hi_it] = std::minmax_element(l.values().begin(), l.values().end());
      const double lmin = *lo_it;
      const double lmax = *hi_it;
      const double upper = (2.0 * lmax + lmin) / 3.0;
      const double lower = (lmax + 2.0 * lmin) / 3.0;
      for (double& v : l.values()) v = (v - upper) * (v - lower);
      return l;
    }
    case ConceptId::Highlight: {
      ScalarField l = luminance(img);
      const double tau = thresholds.tau_highlight;
      for (double& v : l.values()) v = std::max(0.0, (v - tau) / (1.0 - tau));
      return l;
    }
    case ConceptId::Shadow: {
      ScalarField l = luminance(img);
      const double tau = thresholds.tau_shadow;
      for (double& v : l.values()) v = std::max(0.0, (tau - v) / tau);
      return l;
    }
  }
  return ScalarField(w, h);
}

void normalize_weight(ScalarField& field) noexcept {
  double peak = 0.0;
  for (double& v : field.values()) {
    v = std::max(v, 0.0);
    peak = std::max(peak, v);
  }
  // A peak at rounding-noise level (a flat image under W6) would otherwise normalize to 1.
  if (peak <= 1e-12) {
    for (double& v : field.values()) v = 0.0;
    return;
  }
  for (double& v : field.values()) v /= peak;
}

ScalarField weight_map(ConceptId concept_id, const RasterImage& img,
                       const ConceptThresholds& thresholds) {
  ScalarField field = raw_weight_map(concept_id, img, thresholds);
  if (concept_id != ConceptId::Tint) normalize_weight(field);
  return field;
}

}  // namespace pif
