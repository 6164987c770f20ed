#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pif {

using Rgb = std::array<double, 3>;

/// H x W x 3 display-referred image, interleaved row-major, channels in [0,1].
class RasterImage {
 public:
  RasterImage() = default;
  /// Filled with a constant color.
  RasterImage(std::size_t width, std::size_t height, Rgb fill = {0.0, 0.0, 0.0});
  /// Takes ownership of interleaved samples; validates size, finiteness and range.
  RasterImage(std::size_t width, std::size_t height, std::vector<double> samples);

  /// Adopts samples without validation. The caller guarantees the size and the range.
  static RasterImage trusted(std::size_t width, std::size_t height,
                             std::vector<double> samples) noexcept;

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  std::span<const double> samples() const noexcept { return data_; }
  std::span<double> samples() noexcept { return data_; }

  Rgb pixel(std::size_t x, std::size_t y) const noexcept {
    const double* p = &data_[3 * (y * width_ + x)];
    return {p[0], p[1], p[2]};
  }
  void set_pixel(std::size_t x, std::size_t y, Rgb v) noexcept {
    double* p = &data_[3 * (y * width_ + x)];
    p[0] = v[0];
    p[1] = v[1];
    p[2] = v[2];
  }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// Per-pixel (h, s, v); h in [0,1) circular, s and v in [0,1].
class HsvImage {
 public:
  HsvImage() = default;
  HsvImage(std::size_t width, std::size_t height)
      : width_(width), height_(height), data_(3 * width * height, 0.0) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }

  std::span<const double> samples() const noexcept { return data_; }
  std::span<double> samples() noexcept { return data_; }

  double hue(std::size_t i) const noexcept { return data_[3 * i]; }
  double saturation(std::size_t i) const noexcept { return data_[3 * i + 1]; }
  double value(std::size_t i) const noexcept { return data_[3 * i + 2]; }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// H x W real-valued map (weight maps, luminance, gradients).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), values_(width * height, fill) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double at(std::size_t x, std::size_t y) const noexcept { return values_[y * width_ + x]; }
  double& at(std::size_t x, std::size_t y) noexcept { return values_[y * width_ + x]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  double mean() const noexcept;
  double max() const noexcept;
  double min() const noexcept;

  bool operator==(const ScalarField&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
};

// Hexcone conversion of a single pixel.
Rgb hsv_to_rgb(double h, double s, double v) noexcept;
std::array<double, 3> rgb_to_hsv(Rgb rgb) noexcept;

HsvImage to_hsv(const RasterImage& img);
RasterImage to_rgb(const HsvImage& img);

/// Rec. 709 weights.
inline constexpr Rgb kLuminanceWeights = {0.2126, 0.7152, 0.0722};
ScalarField luminance(const RasterImage& img);

/// Normalized 1-D Gaussian taps for an odd kernel size with sigma = (k-1)/6.
std::vector<double> gaussian_taps(int kernel_size);
std::vector<double> gaussian_taps(int kernel_size, double sigma);

/// Separable Gaussian, replicate borders. Throws InvalidArgument on even or
/// nonpositive kernel sizes.
RasterImage gaussian_blur(const RasterImage& img, int kernel_size);

/// Central differences of luminance with replicate borders.
ScalarField gradient_magnitude(const RasterImage& img);
ScalarField gradient_magnitude(const ScalarField& intensity);

/// Box-filter (area-average) resampling to the given size.
RasterImage resize_area(const RasterImage& img, std::size_t width, std::size_t height);
/// Shrinks so the long edge is at most `long_edge`; returns a copy when already small enough.
RasterImage downsample_long_edge(const RasterImage& img, std::size_t long_edge);

/// Per-channel means.
Rgb channel_means(const RasterImage& img);

}  // namespace pif
