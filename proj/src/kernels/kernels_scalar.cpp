#include <cstddef>

#include "kernels_internal.hpp"

namespace pif::kernels {
namespace detail {

void convolve_rows_range(const double* in, double* out, std::size_t width,
                         std::size_t height, std::size_t channels, const double* taps,
                         std::size_t radius, std::size_t x0, std::size_t x1) {
  const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(radius);
  const std::size_t taps_n = 2 * radius + 1;
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = in + y * width * channels;
    double* dst = out + y * width * channels;
    for (std::size_t x = x0; x < x1; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::ptrdiff_t xs = static_cast<std::ptrdiff_t>(x);
        const double center = row[x * channels + c];
        double acc = taps[0] * (row[clamp_index(xs - r, width) * channels + c] - center);
        for (std::size_t t = 1; t < taps_n; ++t) {
          const std::ptrdiff_t sx = xs + static_cast<std::ptrdiff_t>(t) - r;
          acc = acc + taps[t] * (row[clamp_index(sx, width) * channels + c] - center);
        }
        dst[x * channels + c] = center + acc;
      }
    }
  }
}

}  // namespace detail

namespace {

using detail::clamp01;
using detail::clamp_index;
using detail::combine_lanes;

void affine_clamp_rgb(const double* in, double* out, std::size_t pixels,
                      const double* pivot, const double* gain) {
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double x = in[3 * p + c];
      out[3 * p + c] = clamp01(pivot[c] + gain[c] * (x - pivot[c]));
    }
  }
}

void unsharp_clamp(const double* in, const double* blurred, double* out, std::size_t n,
                   double amount) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = clamp01(in[i] + amount * (in[i] - blurred[i]));
  }
}

void convolve_rows(const double* in, double* out, std::size_t width, std::size_t height,
                   std::size_t channels, const double* taps, std::size_t radius) {
  detail::convolve_rows_range(in, out, width, height, channels, taps, radius, 0, width);
}

void convolve_cols(const double* in, double* out, std::size_t row_len, std::size_t height,
                   const double* taps, std::size_t radius) {
  const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(radius);
  const std::size_t taps_n = 2 * radius + 1;
  for (std::size_t y = 0; y < height; ++y) {
    const std::ptrdiff_t ys = static_cast<std::ptrdiff_t>(y);
    double* dst = out + y * row_len;
    const double* center = in + y * row_len;
    const double* first = in + clamp_index(ys - r, height) * row_len;
    for (std::size_t i = 0; i < row_len; ++i) dst[i] = taps[0] * (first[i] - center[i]);
    for (std::size_t t = 1; t < taps_n; ++t) {
      const double* src =
          in + clamp_index(ys + static_cast<std::ptrdiff_t>(t) - r, height) * row_len;
      const double w = taps[t];
      for (std::size_t i = 0; i < row_len; ++i) dst[i] = dst[i] + w * (src[i] - center[i]);
    }
    for (std::size_t i = 0; i < row_len; ++i) dst[i] = center[i] + dst[i];
  }
}

double sum(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t blocks = n / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    for (std::size_t k = 0; k < 4; ++k) acc[k] += x[4 * j + k];
  }
  double total = combine_lanes(acc);
  for (std::size_t i = 4 * blocks; i < n; ++i) total += x[i];
  return total;
}

void channel_sums_rgb(const double* rgb, std::size_t pixels, double* sums) {
  double acc[12] = {};
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    for (std::size_t e = 0; e < 12; ++e) acc[e] += rgb[12 * j + e];
  }
  for (std::size_t c = 0; c < 3; ++c) {
    sums[c] = (acc[c] + acc[c + 3]) + (acc[c + 6] + acc[c + 9]);
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    for (std::size_t c = 0; c < 3; ++c) sums[c] += rgb[3 * p + c];
  }
}

double weighted_sq_diff_sum(const double* w, const double* a, const double* b,
                            std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t blocks = n / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t i = 4 * j + k;
      const double d = a[i] - b[i];
      const double t = w ? w[i] * d : d;
      acc[k] += t * t;
    }
  }
  double total = combine_lanes(acc);
  for (std::size_t i = 4 * blocks; i < n; ++i) {
    const double d = a[i] - b[i];
    const double t = w ? w[i] * d : d;
    total += t * t;
  }
  return total;
}

void luminance_rgb(const double* rgb, double* out, std::size_t pixels) {
  for (std::size_t p = 0; p < pixels; ++p) {
    out[p] = (0.2126 * rgb[3 * p] + 0.7152 * rgb[3 * p + 1]) + 0.0722 * rgb[3 * p + 2];
  }
}

void weighted_gain_clamp_rgb(const double* in, double* out, const double* weight,
                             std::size_t pixels, double amount) {
  for (std::size_t p = 0; p < pixels; ++p) {
    const double gain = 1.0 + amount * weight[p];
    for (std::size_t c = 0; c < 3; ++c) out[3 * p + c] = clamp01(in[3 * p + c] * gain);
  }
}

void tone_toward_rgb(const double* in, double* out, const double* field, double peak,
                     double strength, const double* color, std::size_t pixels) {
  for (std::size_t p = 0; p < pixels; ++p) {
    const double k = strength * (field[p] / peak);
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = in[3 * p + c];
      out[3 * p + c] = clamp01(v + k * (color[c] - v));
    }
  }
}

void saturation_scale_rgb(const double* in, double* out, std::size_t pixels, double gain) {
  for (std::size_t p = 0; p < pixels; ++p) detail::saturation_scale_px(in + 3 * p, out + 3 * p, gain);
}

void hue_shift_rgb(const double* in, double* out, std::size_t pixels, double fraction,
                   double target_hue) {
  const double t6 = 6.0 * target_hue;
  for (std::size_t p = 0; p < pixels; ++p) detail::hue_shift_px(in + 3 * p, out + 3 * p, fraction, t6);
}

void saturation_rgb(const double* rgb, double* out, std::size_t pixels) {
  for (std::size_t p = 0; p < pixels; ++p) out[p] = detail::saturation_px(rgb + 3 * p);
}

void hue_embedding_rgb(const double* rgb, double* cos_out, double* sin_out,
                       std::size_t pixels) {
  for (std::size_t p = 0; p < pixels; ++p) {
    detail::hue_embed_px(rgb + 3 * p, cos_out + p, sin_out + p);
  }
}

void gradient_magnitude(const double* in, double* out, std::size_t width, std::size_t height) {
  for (std::size_t y = 0; y < height; ++y) detail::gradient_span(in, out, width, height, y, 0, width);
}

const KernelTable kScalar{
    .name = "scalar",
    .affine_clamp_rgb = affine_clamp_rgb,
    .unsharp_clamp = unsharp_clamp,
    .convolve_rows = convolve_rows,
    .convolve_cols = convolve_cols,
    .sum = sum,
    .channel_sums_rgb = channel_sums_rgb,
    .weighted_sq_diff_sum = weighted_sq_diff_sum,
    .luminance_rgb = luminance_rgb,
    .weighted_gain_clamp_rgb = weighted_gain_clamp_rgb,
    .tone_toward_rgb = tone_toward_rgb,
    .saturation_scale_rgb = saturation_scale_rgb,
    .hue_shift_rgb = hue_shift_rgb,
    .saturation_rgb = saturation_rgb,
    .hue_embedding_rgb = hue_embedding_rgb,
    .gradient_magnitude = gradient_magnitude,
};

}  // namespace

const KernelTable& scalar() { return kScalar; }

}  // namespace pif::kernels
