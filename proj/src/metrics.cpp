#include "pif/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pif/error.hpp"
#include "pif/kernels.hpp"

namespace pif {
namespace {

void require_same_size(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::DimensionMismatch, "images differ in size");
  }
}

// "Valid" separable filtering: output is (w - 2r) x (h - 2r).
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t w, std::size_t h,
                                 const std::vector<double>& taps) {
  const std::size_t r = taps.size() / 2;
  const std::size_t ow = w - 2 * r;
  const std::size_t oh = h - 2 * r;
  std::vector<double> tmp(ow * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * in[y * w + x + t];
      tmp[y * ow + x] = acc;
    }
  }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * tmp[(y + t) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const RasterImage& a, const RasterImage& b) {
  require_same_size(a, b);
  const double sse = kernels::active().weighted_sq_diff_sum(
      nullptr, a.samples().data(), b.samples().data(), a.samples().size());
  if (sse == 0.0) return kPsnrCap;
  const double mse = sse / static_cast<double>(a.samples().size());
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const RasterImage& a, const RasterImage& b) {
  require_same_size(a, b);
  constexpr int kWindow = 11;
  if (a.width() < kWindow || a.height() < kWindow) {
    throw Error(ErrorCode::InvalidArgument, "ssim needs images at least 11x11");
  }
  const auto taps = gaussian_taps(kWindow, 1.5);
  const std::size_t w = a.width();
  const std::size_t h = a.height();
  const ScalarField la = luminance(a);
  const ScalarField lb = luminance(b);
  std::vector<double> x(la.values().begin(), la.values().end());
  std::vector<double> y(lb.values().begin(), lb.values().end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, w, h, taps);
  const auto my = filter_valid(y, w, h, taps);
  const auto mxx = filter_valid(xx, w, h, taps);
  const auto myy = filter_valid(yy, w, h, taps);
  const auto mxy = filter_valid(xy, w, h, taps);

  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cov = mxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

std::string_view channel_name(HistogramChannel c) noexcept {
  switch (c) {
    case HistogramChannel::Luminance: return "luminance";
    case HistogramChannel::Red: return "r";
    case HistogramChannel::Green: return "g";
    case HistogramChannel::Blue: return "b";
  }
  return "?";
}

Histogram histogram(const RasterImage& img, HistogramChannel channel) {
  Histogram hist;
  hist.channel = channel;
  constexpr double kTop = 1.0 - 1e-12;
  auto add = [&](double v) {
    const auto bin = static_cast<std::size_t>(std::floor(std::clamp(v, 0.0, kTop) * kHistogramBins));
    hist.bins[bin] += 1.0;
  };
  if (channel == HistogramChannel::Luminance) {
    const ScalarField lum = luminance(img);
    for (double v : lum.values()) add(v);
  } else {
    const std::size_t c = channel == HistogramChannel::Red ? 0 : channel == HistogramChannel::Green ? 1 : 2;
    const auto px = img.samples();
    for (std::size_t i = 0; i < img.pixel_count(); ++i) add(px[3 * i + c]);
  }
  const double n = static_cast<double>(img.pixel_count());
  for (double& b : hist.bins) b /= n;
  return hist;
}

double emd(const Histogram& a, const Histogram& b) {
  if (a.channel != b.channel) {
    throw Error(ErrorCode::InvalidArgument, "histogram channels differ");
  }
  double cdf_a = 0.0;
  double cdf_b = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < kHistogramBins; ++k) {
    cdf_a += a.bins[k];
    cdf_b += b.bins[k];
    total += std::abs(cdf_a - cdf_b);
  }
  return total / static_cast<double>(kHistogramBins);
}

double emd_image(const RasterImage& a, const RasterImage& b) {
  double total = 0.0;
  for (HistogramChannel c : {HistogramChannel::Luminance, HistogramChannel::Red,
                             HistogramChannel::Green, HistogramChannel::Blue}) {
    total += emd(histogram(a, c), histogram(b, c));
  }
  return total / 4.0;
}

ConceptStats concept_stats(const RasterImage& img, const ConceptThresholds& thresholds) {
  ConceptStats s;
  const ScalarField lum = luminance(img);
  const std::size_t n = lum.size();
  s.mean_luminance = lum.mean();
  double var = 0.0;
  for (double v : lum.values()) var += (v - s.mean_luminance) * (v - s.mean_luminance);
  s.luminance_std = std::sqrt(var / static_cast<double>(n));

  const HsvImage hsv = to_hsv(img);
  double sat = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (std::size_t i = 0; i < n; ++i) {
    const double si = hsv.saturation(i);
    sat += si;
    hx += si * std::cos(kTwoPi * hsv.hue(i));
    hy += si * std::sin(kTwoPi * hsv.hue(i));
  }
  s.mean_saturation = sat / static_cast<double>(n);
  if (sat > 0.0) {
    s.circular_mean_hue = wrap_hue(std::atan2(hy, hx) / kTwoPi);
    s.hue_resultant = std::hypot(hx, hy) / sat;
  }

  s.edge_energy = gradient_magnitude(lum).mean();

  // Corner vs center quartiles by radial weight.
  const ScalarField w2 = raw_weight_map(ConceptId::Vignetting, img, thresholds);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w2[a] < w2[b]; });
  const std::size_t quartile = std::max<std::size_t>(1, n / 4);
  double center = 0.0;
  double corner = 0.0;
  for (std::size_t i = 0; i < quartile; ++i) {
    center += lum[order[i]];
    corner += lum[order[n - 1 - i]];
  }
  center /= static_cast<double>(quartile);
  corner /= static_cast<double>(quartile);
  if (center > 1e-6) s.vignetting_ratio = corner / center;

  Rgb hi{0, 0, 0};
  Rgb lo{0, 0, 0};
  std::size_t n_hi = 0;
  std::size_t n_lo = 0;
  const auto px = img.samples();
  for (std::size_t i = 0; i < n; ++i) {
    if (lum[i] > thresholds.tau_highlight) {
      for (std::size_t c = 0; c < 3; ++c) hi[c] += px[3 * i + c];
      ++n_hi;
    } else if (lum[i] < thresholds.tau_shadow) {
      for (std::size_t c = 0; c < 3; ++c) lo[c] += px[3 * i + c];
      ++n_lo;
    }
  }
  if (n_hi > 0) {
    for (double& c : hi) c /= static_cast<double>(n_hi);
    s.highlight_mean_rgb = hi;
  }
  if (n_lo > 0) {
    for (double& c : lo) c /= static_cast<double>(n_lo);
    s.shadow_mean_rgb = lo;
  }
  return s;
}

MetricReport evaluate_pair(const RasterImage& a, const RasterImage& b) {
  return {psnr(a, b), ssim(a, b), emd_image(a, b)};
}

std::string report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["psnr"] = r.psnr;
  j["ssim"] = r.ssim;
  j["emd"] = r.emd;
  return j.dump();
}

std::string report_table(const MetricReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%10s %10s %10s\n%10.4f %10.6f %10.6f\n", "psnr", "ssim",
                "emd", r.psnr, r.ssim, r.emd);
  return buf;
}

std::string stats_json(const ConceptStats& s) {
  nlohmann::ordered_json j;
  j["mean_luminance"] = s.mean_luminance;
  j["luminance_std"] = s.luminance_std;
  j["mean_saturation"] = s.mean_saturation;
  j["circular_mean_hue"] = s.circular_mean_hue;
  j["hue_resultant"] = s.hue_resultant;
  j["edge_energy"] = s.edge_energy;
  j["vignetting_ratio"] = s.vignetting_ratio ? nlohmann::ordered_json(*s.vignetting_ratio) : nullptr;
  auto rgb = [](const std::optional<Rgb>& v) {
    return v ? nlohmann::ordered_json::array({(*v)[0], (*v)[1], (*v)[2]}) : nlohmann::ordered_json(nullptr);
  };
  j["highlight_mean_rgb"] = rgb(s.highlight_mean_rgb);
  j["shadow_mean_rgb"] = rgb(s.shadow_mean_rgb);
  return j.dump();
}

}  // namespace pif
