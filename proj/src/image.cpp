#include "pif/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pif/error.hpp"
#include "pif/kernels.hpp"

namespace pif {

RasterImage::RasterImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), data_(3 * width * height) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::ZeroDimension, "image dimensions must be positive");
  }
  for (double c : fill) {
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      throw Error(ErrorCode::OutOfRange, "fill color outside [0,1]");
    }
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = fill[i % 3];
}

RasterImage::RasterImage(std::size_t width, std::size_t height, std::vector<double> samples)
    : width_(width), height_(height), data_(std::move(samples)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::ZeroDimension, "image dimensions must be positive");
  }
  if (data_.size() != 3 * width * height) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(3 * width * height) + " samples, got " +
                    std::to_string(data_.size()));
  }
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::OutOfRange, "pixel value outside [0,1]");
    }
  }
}

RasterImage RasterImage::trusted(std::size_t width, std::size_t height,
                                 std::vector<double> samples) noexcept {
  RasterImage img;
  img.width_ = width;
  img.height_ = height;
  img.data_ = std::move(samples);
  return img;
}

double ScalarField::mean() const noexcept {
  if (values_.empty()) return 0.0;
  return kernels::active().sum(values_.data(), values_.size()) /
         static_cast<double>(values_.size());
}

double ScalarField::max() const noexcept {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const noexcept {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

std::array<double, 3> rgb_to_hsv(Rgb rgb) noexcept {
  const auto [r, g, b] = rgb;
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double chroma = hi - lo;
  const double s = hi > 0.0 ? chroma / hi : 0.0;
  double h = 0.0;
  if (chroma > 0.0) {
    if (hi == r) {
      h = (g - b) / chroma;
      if (h < 0.0) h += 6.0;
    } else if (hi == g) {
      h = (b - r) / chroma + 2.0;
    } else {
      h = (r - g) / chroma + 4.0;
    }
    h /= 6.0;
    if (h >= 1.0) h -= 1.0;
  }
  return {h, s, hi};
}

Rgb hsv_to_rgb(double h, double s, double v) noexcept {
  if (s <= 0.0) return {v, v, v};
  h -= std::floor(h);
  const double h6 = h * 6.0;
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (static_cast<int>(sector) % 6) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

HsvImage to_hsv(const RasterImage& img) {
  HsvImage out(img.width(), img.height());
  const auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto hsv = rgb_to_hsv({src[3 * i], src[3 * i + 1], src[3 * i + 2]});
    dst[3 * i] = hsv[0];
    dst[3 * i + 1] = hsv[1];
    dst[3 * i + 2] = hsv[2];
  }
  return out;
}

RasterImage to_rgb(const HsvImage& img) {
  std::vector<double> samples(3 * img.pixel_count());
  const auto src = img.samples();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb rgb = hsv_to_rgb(src[3 * i], std::clamp(src[3 * i + 1], 0.0, 1.0),
                               std::clamp(src[3 * i + 2], 0.0, 1.0));
    for (std::size_t c = 0; c < 3; ++c) samples[3 * i + c] = std::clamp(rgb[c], 0.0, 1.0);
  }
  return RasterImage::trusted(img.width(), img.height(), std::move(samples));
}

ScalarField luminance(const RasterImage& img) {
  ScalarField out(img.width(), img.height());
  kernels::active().luminance_rgb(img.samples().data(), out.values().data(),
                                  img.pixel_count());
  return out;
}

std::vector<double> gaussian_taps(int kernel_size) {
  return gaussian_taps(kernel_size, (kernel_size - 1) / 6.0);
}

std::vector<double> gaussian_taps(int kernel_size, double sigma) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "kernel size must be odd and positive, got " + std::to_string(kernel_size));
  }
  if (kernel_size == 1 || sigma <= 0.0) {
    std::vector<double> taps(static_cast<std::size_t>(kernel_size), 0.0);
    taps[taps.size() / 2] = 1.0;
    return taps;
  }
  const int radius = kernel_size / 2;
  std::vector<double> taps(static_cast<std::size_t>(kernel_size));
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double w = std::exp(-(t * t) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(t + radius)] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

RasterImage gaussian_blur(const RasterImage& img, int kernel_size) {
  const std::vector<double> taps = gaussian_taps(kernel_size);
  if (kernel_size == 1) return img;
  const auto& k = kernels::active();
  const std::size_t radius = taps.size() / 2;
  std::vector<double> tmp(img.samples().size());
  std::vector<double> out(img.samples().size());
  k.convolve_rows(img.samples().data(), tmp.data(), img.width(), img.height(), 3, taps.data(),
                  radius);
  k.convolve_cols(tmp.data(), out.data(), 3 * img.width(), img.height(), taps.data(), radius);
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return RasterImage::trusted(img.width(), img.height(), std::move(out));
}

ScalarField gradient_magnitude(const ScalarField& intensity) {
  ScalarField out(intensity.width(), intensity.height());
  kernels::active().gradient_magnitude(intensity.values().data(), out.values().data(),
                                       intensity.width(), intensity.height());
  return out;
}

ScalarField gradient_magnitude(const RasterImage& img) {
  return gradient_magnitude(luminance(img));
}

namespace {

struct Footprint {
  std::size_t first = 0;
  std::vector<double> weights;
};

// Fractional coverage of source cells by each destination cell.
std::vector<Footprint> area_footprints(std::size_t src, std::size_t dst) {
  std::vector<Footprint> out(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t d = 0; d < dst; ++d) {
    const double lo = d * scale;
    const double hi = (d + 1) * scale;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(src, static_cast<std::size_t>(std::ceil(hi)));
    out[d].first = first;
    for (std::size_t s = first; s < last; ++s) {
      const double cover = std::min<double>(hi, s + 1.0) - std::max<double>(lo, s);
      out[d].weights.push_back(cover / scale);
    }
  }
  return out;
}

}  // namespace

RasterImage resize_area(const RasterImage& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::ZeroDimension, "resize target must be positive");
  }
  if (width == img.width() && height == img.height()) return img;
  const auto cols = area_footprints(img.width(), width);
  const auto rows = area_footprints(img.height(), height);
  const auto src = img.samples();
  std::vector<double> tmp(3 * width * img.height(), 0.0);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const auto& fp = cols[x];
      for (std::size_t j = 0; j < fp.weights.size(); ++j) {
        const std::size_t s = 3 * (y * img.width() + fp.first + j);
        for (std::size_t c = 0; c < 3; ++c) tmp[3 * (y * width + x) + c] += fp.weights[j] * src[s + c];
      }
    }
  }
  std::vector<double> out(3 * width * height, 0.0);
  for (std::size_t y = 0; y < height; ++y) {
    const auto& fp = rows[y];
    for (std::size_t j = 0; j < fp.weights.size(); ++j) {
      const double wgt = fp.weights[j];
      const double* row = &tmp[3 * (fp.first + j) * width];
      double* dst = &out[3 * y * width];
      for (std::size_t i = 0; i < 3 * width; ++i) dst[i] += wgt * row[i];
    }
  }
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return RasterImage(width, height, std::move(out));
}

RasterImage downsample_long_edge(const RasterImage& img, std::size_t long_edge) {
  const std::size_t longest = std::max(img.width(), img.height());
  if (long_edge == 0 || longest <= long_edge) return img;
  const double scale = static_cast<double>(long_edge) / static_cast<double>(longest);
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.width() * scale)));
  const auto h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.height() * scale)));
  return resize_area(img, w, h);
}

Rgb channel_means(const RasterImage& img) {
  double sums[3];
  kernels::active().channel_sums_rgb(img.samples().data(), img.pixel_count(), sums);
  const double n = static_cast<double>(img.pixel_count());
  return {sums[0] / n, sums[1] / n, sums[2] / n};
}

}  // namespace pif
