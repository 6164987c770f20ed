#include "pif/pcturb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <sys/stat.h>

#include "pif/error.hpp"
#include "pif/kernels.hpp"
#include "stages.hpp"

namespace pif {
namespace {

RasterImage apply_affine(const RasterImage& img, const double* pivot, const double* gain) {
  std::vector<double> out(img.samples().size());
  kernels::active().affine_clamp_rgb(img.samples().data(), out.data(), img.pixel_count(), pivot,
                                     gain);
  return RasterImage::trusted(img.width(), img.height(), std::move(out));
}

RasterImage run_stages(const RasterImage& img, const ConceptParams& params, int first, int last,
                       const ConceptThresholds& thresholds) {
  params.validate();
  std::vector<double> px(img.samples().begin(), img.samples().end());
  detail::StageScratch scratch;
  detail::run_stages_in_place(px.data(), img.width(), img.height(), params, first, last,
                              thresholds, scratch);
  return RasterImage::trusted(img.width(), img.height(), std::move(px));
}

}  // namespace

std::size_t ConceptMask::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<ConceptId> ConceptMask::members() const {
  std::vector<ConceptId> out;
  for (ConceptId id : kAllConcepts) {
    if (contains(id)) out.push_back(id);
  }
  return out;
}

RasterImage perturb(const RasterImage& img, const ConceptParams& params,
                    const ConceptThresholds& thresholds) {
  return run_stages(img, params, 1, 8, thresholds);
}

RasterImage perturb_from(const RasterImage& img, const ConceptParams& params, ConceptId first,
                         const ConceptThresholds& thresholds) {
  return run_stages(img, params, ordinal(first), 8, thresholds);
}

RasterImage perturb_through(const RasterImage& img, const ConceptParams& params,
                            ConceptId last, const ConceptThresholds& thresholds) {
  return run_stages(img, params, 1, ordinal(last), thresholds);
}

ConceptParams restrict_params(const ConceptParams& params, ConceptMask mask) {
  const ConceptParams neutral = neutral_params();
  ConceptParams out = params;
  for (ConceptId id : kAllConcepts) {
    if (!mask.contains(id)) out.set(id, neutral.get(id));
  }
  return out;
}

RasterImage perturb_masked(const RasterImage& img, const ConceptParams& params,
                           ConceptMask mask, const ConceptThresholds& thresholds) {
  return perturb(img, restrict_params(params, mask), thresholds);
}

bool is_constant_image(const RasterImage& img) noexcept {
  const auto s = img.samples();
  for (std::size_t i = 3; i < s.size(); i += 3) {
    if (s[i] != s[0] || s[i + 1] != s[1] || s[i + 2] != s[2]) return false;
  }
  return true;
}

RasterImage neutralize(const RasterImage& img, const NeutralTargets& t) {
  if (is_constant_image(img)) {
    throw Error(ErrorCode::DegenerateImage, "cannot neutralize a constant image");
  }
  const double zero[3] = {0.0, 0.0, 0.0};

  // Gray world.
  const Rgb means = channel_means(img);
  const double target = (means[0] + means[1] + means[2]) / 3.0;
  double wb[3];
  for (std::size_t c = 0; c < 3; ++c) {
    wb[c] = means[c] > 0.0 ? std::clamp(target / means[c], t.white_balance_gain_min,
                                        t.white_balance_gain_max)
                           : t.white_balance_gain_max;
  }
  RasterImage out = apply_affine(img, zero, wb);

  // Exposure.
  const double mean_l = luminance(out).mean();
  const double eg = mean_l > 0.0
                        ? std::clamp(t.mean_luminance / mean_l, t.exposure_gain_min,
                                     t.exposure_gain_max)
                        : t.exposure_gain_max;
  const double exposure_gain[3] = {eg, eg, eg};
  out = apply_affine(out, zero, exposure_gain);

  // Contrast about the luminance mean.
  const ScalarField lum = luminance(out);
  const double mu = lum.mean();
  double var = 0.0;
  for (double v : lum.values()) var += (v - mu) * (v - mu);
  const double sigma = std::sqrt(var / static_cast<double>(lum.size()));
  const double cg = sigma > 0.0 ? std::clamp(t.luminance_std / sigma, t.contrast_gain_min,
                                             t.contrast_gain_max)
                                : t.contrast_gain_max;
  const double pivot[3] = {mu, mu, mu};
  const double contrast_gain[3] = {cg, cg, cg};
  return apply_affine(out, pivot, contrast_gain);
}

std::string_view mode_name(ApplyMode mode) noexcept {
  return mode == ApplyMode::Absolute ? "absolute" : "relative";
}

std::optional<ApplyMode> mode_from_name(std::string_view name) noexcept {
  if (name == "absolute") return ApplyMode::Absolute;
  if (name == "relative") return ApplyMode::Relative;
  return std::nullopt;
}

RasterImage apply_style(const RasterImage& content, const StylePreset& preset, ApplyMode mode,
                        ConceptMask mask) {
  if (mode == ApplyMode::Absolute) {
    return perturb_masked(neutralize(content), preset.params, mask, preset.thresholds);
  }
  return perturb_masked(content, preset.params, mask, preset.thresholds);
}

std::string format_rfc3339(std::int64_t unix_seconds) {
  const std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string now_rfc3339() {
  return format_rfc3339(static_cast<std::int64_t>(std::time(nullptr)));
}

std::string reproducible_created_at(const std::vector<std::filesystem::path>& inputs) {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end && *end == '\0' && v >= 0) return format_rfc3339(v);
  }
  std::int64_t newest = -1;
  for (const auto& path : inputs) {
    struct stat st {};
    if (::stat(path.c_str(), &st) == 0) newest = std::max<std::int64_t>(newest, st.st_mtime);
  }
  return newest >= 0 ? format_rfc3339(newest) : now_rfc3339();
}

}  // namespace pif
