#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "pif/concepts.hpp"
#include "pif/image.hpp"

namespace pif {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all channels; kPsnrCap for identical images.
double psnr(const RasterImage& a, const RasterImage& b);

/// Single-scale SSIM on luminance: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, L = 1, averaged over interior window centers. Both sides must be >= 11.
double ssim(const RasterImage& a, const RasterImage& b);

enum class HistogramChannel { Luminance, Red, Green, Blue };
std::string_view channel_name(HistogramChannel c) noexcept;

inline constexpr std::size_t kHistogramBins = 256;

struct Histogram {
  HistogramChannel channel = HistogramChannel::Luminance;
  std::array<double, kHistogramBins> bins{};
};

/// Value v lands in bin floor(min(v, 1 - eps) * 256); normalized to unit mass.
Histogram histogram(const RasterImage& img, HistogramChannel channel);

/// 1-D Wasserstein-1 distance in intensity units.
/// InvalidArgument when the channel tags differ.
double emd(const Histogram& a, const Histogram& b);

/// Mean of emd over the luminance, red, green and blue histograms.
double emd_image(const RasterImage& a, const RasterImage& b);

struct ConceptStats {
  double mean_luminance = 0.0;
  double luminance_std = 0.0;
  double mean_saturation = 0.0;
  double circular_mean_hue = 0.0;  ///< saturation-weighted
  double hue_resultant = 0.0;      ///< resultant length in [0, 1]
  double edge_energy = 0.0;        ///< mean gradient magnitude
  std::optional<double> vignetting_ratio;  ///< corner quartile / center quartile luminance
  std::optional<Rgb> highlight_mean_rgb;
  std::optional<Rgb> shadow_mean_rgb;
};

ConceptStats concept_stats(const RasterImage& img, const ConceptThresholds& thresholds = {});

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double emd = 0.0;
};

MetricReport evaluate_pair(const RasterImage& a, const RasterImage& b);
std::string report_json(const MetricReport& r);
/// Aligned columns psnr / ssim / emd with a header row.
std::string report_table(const MetricReport& r);
std::string stats_json(const ConceptStats& s);

}  // namespace pif
