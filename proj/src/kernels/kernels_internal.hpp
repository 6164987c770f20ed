#pragma once

#include <cmath>
#include <cstddef>

#include "pif/kernels.hpp"

namespace pif::kernels::detail {

// Written to match _mm256_max_pd(v, 0) followed by _mm256_min_pd(v, 1),
// including the handling of signed zeros.
inline double clamp01(double v) noexcept {
  v = v > 0.0 ? v : 0.0;
  return v < 1.0 ? v : 1.0;
}

// Same operand order as _mm256_max_pd / _mm256_min_pd.
inline double max_of(double a, double b) noexcept { return a > b ? a : b; }
inline double min_of(double a, double b) noexcept { return a < b ? a : b; }

inline std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) noexcept {
  if (i < 0) return 0;
  if (static_cast<std::size_t>(i) >= n) return n - 1;
  return static_cast<std::size_t>(i);
}

inline double combine_lanes(const double* acc) noexcept {
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

// Scalar horizontal convolution restricted to output columns [x0, x1).
void convolve_rows_range(const double* in, double* out, std::size_t width,
                         std::size_t height, std::size_t channels, const double* taps,
                         std::size_t radius, std::size_t x0, std::size_t x1);

const KernelTable* avx2_table();

// Per-pixel bodies shared by the scalar table and the AVX2 remainder loops.

// Hue in sextants [0, 6) of a pixel with positive chroma.
inline double hue_sextant(double r, double g, double b, double hi, double chroma) noexcept {
  const double num = hi == r ? g - b : (hi == g ? b - r : r - g);
  const double offset = hi == r ? 0.0 : (hi == g ? 2.0 : 4.0);
  double h6 = num / chroma + offset;
  if (h6 < 0.0) h6 = h6 + 6.0;
  if (h6 >= 6.0) h6 = h6 - 6.0;
  return h6;
}

inline void saturation_scale_px(const double* in, double* out, double gain) noexcept {
  const double r = in[0], g = in[1], b = in[2];
  const double hi = max_of(max_of(r, g), b);
  const double lo = min_of(min_of(r, g), b);
  if (!(hi > lo)) {
    out[0] = r;
    out[1] = g;
    out[2] = b;
    return;
  }
  const double s = (hi - lo) / hi;
  const double ratio = clamp01(gain * s) / s;
  out[0] = clamp01(hi - (hi - r) * ratio);
  out[1] = clamp01(hi - (hi - g) * ratio);
  out[2] = clamp01(hi - (hi - b) * ratio);
}

// One RGB channel of the hexcone color with value hi, chroma and sextant hue h6:
// hi - chroma * clamp(min(k, 4 - k), 0, 1) with k = (h6 + phase) mod 6.
inline double hexcone_channel(double hi, double chroma, double h6, double phase) noexcept {
  double k = h6 + phase;
  if (k >= 6.0) k = k - 6.0;
  double m = min_of(k, 4.0 - k);
  m = min_of(m, 1.0);
  m = max_of(m, 0.0);
  return hi - chroma * m;
}

inline void hue_shift_px(const double* in, double* out, double fraction, double t6) noexcept {
  const double r = in[0], g = in[1], b = in[2];
  const double hi = max_of(max_of(r, g), b);
  const double lo = min_of(min_of(r, g), b);
  const double chroma = hi - lo;
  if (!(chroma > 0.0)) {
    out[0] = r;
    out[1] = g;
    out[2] = b;
    return;
  }
  const double h6 = hue_sextant(r, g, b, hi, chroma);
  double d = t6 - h6;
  if (d > 3.0) d = d - 6.0;
  if (d <= -3.0) d = d + 6.0;
  double nh = h6 + fraction * d;
  if (nh < 0.0) nh = nh + 6.0;
  if (nh >= 6.0) nh = nh - 6.0;
  const double o0 = hexcone_channel(hi, chroma, nh, 5.0);
  const double o1 = hexcone_channel(hi, chroma, nh, 3.0);
  const double o2 = hexcone_channel(hi, chroma, nh, 1.0);
  out[0] = clamp01(o0);
  out[1] = clamp01(o1);
  out[2] = clamp01(o2);
}

inline double saturation_px(const double* p) noexcept {
  const double hi = max_of(max_of(p[0], p[1]), p[2]);
  const double lo = min_of(min_of(p[0], p[1]), p[2]);
  return hi > 0.0 ? (hi - lo) / hi : 0.0;
}

// Taylor coefficients for |phi| <= pi/4; truncation error is below 1e-16.
inline constexpr double kSin[7] = {-1.0 / 6.0,          1.0 / 120.0,
                                   -1.0 / 5040.0,       1.0 / 362880.0,
                                   -1.0 / 39916800.0,   1.0 / 6227020800.0,
                                   -1.0 / 1307674368000.0};
inline constexpr double kCos[8] = {-1.0 / 2.0,            1.0 / 24.0,
                                   -1.0 / 720.0,          1.0 / 40320.0,
                                   -1.0 / 3628800.0,      1.0 / 479001600.0,
                                   -1.0 / 87178291200.0,  1.0 / 20922789888000.0};
inline constexpr double kHalfPi = 1.5707963267948966192313216916398;

inline void hue_embed_px(const double* p, double* c_out, double* s_out) noexcept {
  const double r = p[0], g = p[1], b = p[2];
  const double hi = max_of(max_of(r, g), b);
  const double lo = min_of(min_of(r, g), b);
  const double chroma = hi - lo;
  if (!(chroma > 0.0)) {
    *c_out = 0.0;
    *s_out = 0.0;
    return;
  }
  const double s = chroma / hi;
  const double u = hue_sextant(r, g, b, hi, chroma) * (2.0 / 3.0);
  const double q = std::floor(u + 0.5);
  const double phi = (u - q) * kHalfPi;
  const double z = phi * phi;
  double ps = kSin[6];
  for (int i = 5; i >= 0; --i) ps = kSin[i] + z * ps;
  const double sn = phi + phi * (z * ps);
  double pc = kCos[7];
  for (int i = 6; i >= 0; --i) pc = kCos[i] + z * pc;
  const double cs = 1.0 + z * pc;
  double c, sv;
  if (q == 1.0) { c = -sn; sv = cs; }
  else if (q == 2.0) { c = -cs; sv = -sn; }
  else if (q == 3.0) { c = sn; sv = -cs; }
  else { c = cs; sv = sn; }
  *c_out = s * c;
  *s_out = s * sv;
}

inline double gradient_px(const double* in, std::size_t w, std::size_t h, std::size_t x,
                          std::size_t y) noexcept {
  const std::size_t xm = x == 0 ? 0 : x - 1;
  const std::size_t xp = x + 1 < w ? x + 1 : w - 1;
  const std::size_t ym = y == 0 ? 0 : y - 1;
  const std::size_t yp = y + 1 < h ? y + 1 : h - 1;
  const double dx = 0.5 * (in[y * w + xp] - in[y * w + xm]);
  const double dy = 0.5 * (in[yp * w + x] - in[ym * w + x]);
  return std::sqrt(dx * dx + dy * dy);
}

// Gradient over row y, columns [x0, x1).
inline void gradient_span(const double* in, double* out, std::size_t w, std::size_t h,
                          std::size_t y, std::size_t x0, std::size_t x1) noexcept {
  for (std::size_t x = x0; x < x1; ++x) out[y * w + x] = gradient_px(in, w, h, x, y);
}

}  // namespace pif::kernels::detail
