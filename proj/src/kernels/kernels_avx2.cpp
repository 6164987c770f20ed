// Compiled with -mavx2 only. No FMA: results must match the scalar table exactly.

#include <immintrin.h>

#include <cstddef>

#include "kernels_internal.hpp"

namespace pif::kernels {
namespace {

using detail::clamp01;
using detail::combine_lanes;

inline __m256d clamp01_pd(__m256d v) {
  return _mm256_min_pd(_mm256_max_pd(v, _mm256_setzero_pd()), _mm256_set1_pd(1.0));
}

void affine_clamp_rgb(const double* in, double* out, std::size_t pixels,
                      const double* pivot, const double* gain) {
  // Four pixels are twelve samples; the channel pattern repeats every three vectors.
  const __m256d p0 = _mm256_setr_pd(pivot[0], pivot[1], pivot[2], pivot[0]);
  const __m256d p1 = _mm256_setr_pd(pivot[1], pivot[2], pivot[0], pivot[1]);
  const __m256d p2 = _mm256_setr_pd(pivot[2], pivot[0], pivot[1], pivot[2]);
  const __m256d g0 = _mm256_setr_pd(gain[0], gain[1], gain[2], gain[0]);
  const __m256d g1 = _mm256_setr_pd(gain[1], gain[2], gain[0], gain[1]);
  const __m256d g2 = _mm256_setr_pd(gain[2], gain[0], gain[1], gain[2]);
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const double* src = in + 12 * j;
    double* dst = out + 12 * j;
    __m256d v0 = _mm256_loadu_pd(src);
    __m256d v1 = _mm256_loadu_pd(src + 4);
    __m256d v2 = _mm256_loadu_pd(src + 8);
    v0 = _mm256_add_pd(p0, _mm256_mul_pd(g0, _mm256_sub_pd(v0, p0)));
    v1 = _mm256_add_pd(p1, _mm256_mul_pd(g1, _mm256_sub_pd(v1, p1)));
    v2 = _mm256_add_pd(p2, _mm256_mul_pd(g2, _mm256_sub_pd(v2, p2)));
    _mm256_storeu_pd(dst, clamp01_pd(v0));
    _mm256_storeu_pd(dst + 4, clamp01_pd(v1));
    _mm256_storeu_pd(dst + 8, clamp01_pd(v2));
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double x = in[3 * p + c];
      out[3 * p + c] = clamp01(pivot[c] + gain[c] * (x - pivot[c]));
    }
  }
}

void unsharp_clamp(const double* in, const double* blurred, double* out, std::size_t n,
                   double amount) {
  const __m256d a = _mm256_set1_pd(amount);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in + i);
    const __m256d b = _mm256_loadu_pd(blurred + i);
    const __m256d v = _mm256_add_pd(x, _mm256_mul_pd(a, _mm256_sub_pd(x, b)));
    _mm256_storeu_pd(out + i, clamp01_pd(v));
  }
  for (; i < n; ++i) out[i] = clamp01(in[i] + amount * (in[i] - blurred[i]));
}

void convolve_rows(const double* in, double* out, std::size_t width, std::size_t height,
                   std::size_t channels, const double* taps, std::size_t radius) {
  if (width <= 2 * radius) {
    detail::convolve_rows_range(in, out, width, height, channels, taps, radius, 0, width);
    return;
  }
  const std::size_t taps_n = 2 * radius + 1;
  const std::size_t row_len = width * channels;
  const std::size_t lo = radius * channels;
  const std::size_t hi = (width - radius) * channels;
  const std::ptrdiff_t back = static_cast<std::ptrdiff_t>(radius * channels);
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = in + y * row_len;
    double* dst = out + y * row_len;
    detail::convolve_rows_range(row, dst, width, 1, channels, taps, radius, 0, radius);
    detail::convolve_rows_range(row, dst, width, 1, channels, taps, radius, width - radius,
                                width);
    std::size_t e = lo;
    for (; e + 4 <= hi; e += 4) {
      const double* base = row + e - back;
      const __m256d center = _mm256_loadu_pd(row + e);
      __m256d acc = _mm256_mul_pd(_mm256_set1_pd(taps[0]), _mm256_sub_pd(_mm256_loadu_pd(base), center));
      for (std::size_t t = 1; t < taps_n; ++t) {
        const __m256d v = _mm256_sub_pd(_mm256_loadu_pd(base + t * channels), center);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[t]), v));
      }
      _mm256_storeu_pd(dst + e, _mm256_add_pd(center, acc));
    }
    for (; e < hi; ++e) {
      const double* base = row + e - back;
      const double center = row[e];
      double acc = taps[0] * (base[0] - center);
      for (std::size_t t = 1; t < taps_n; ++t) acc = acc + taps[t] * (base[t * channels] - center);
      dst[e] = center + acc;
    }
  }
}

void convolve_cols(const double* in, double* out, std::size_t row_len, std::size_t height,
                   const double* taps, std::size_t radius) {
  const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(radius);
  const std::size_t taps_n = 2 * radius + 1;
  for (std::size_t y = 0; y < height; ++y) {
    const std::ptrdiff_t ys = static_cast<std::ptrdiff_t>(y);
    double* dst = out + y * row_len;
    const double* center = in + y * row_len;
    const double* first = in + detail::clamp_index(ys - r, height) * row_len;
    const __m256d w0 = _mm256_set1_pd(taps[0]);
    std::size_t i = 0;
    for (; i + 4 <= row_len; i += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(first + i), _mm256_loadu_pd(center + i));
      _mm256_storeu_pd(dst + i, _mm256_mul_pd(w0, d));
    }
    for (; i < row_len; ++i) dst[i] = taps[0] * (first[i] - center[i]);
    for (std::size_t t = 1; t < taps_n; ++t) {
      const double* src =
          in + detail::clamp_index(ys + static_cast<std::ptrdiff_t>(t) - r, height) * row_len;
      const double w = taps[t];
      const __m256d wv = _mm256_set1_pd(w);
      i = 0;
      for (; i + 4 <= row_len; i += 4) {
        const __m256d acc = _mm256_loadu_pd(dst + i);
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(src + i), _mm256_loadu_pd(center + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(acc, _mm256_mul_pd(wv, d)));
      }
      for (; i < row_len; ++i) dst[i] = dst[i] + w * (src[i] - center[i]);
    }
    i = 0;
    for (; i + 4 <= row_len; i += 4) {
      _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(center + i), _mm256_loadu_pd(dst + i)));
    }
    for (; i < row_len; ++i) dst[i] = center[i] + dst[i];
  }
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t blocks = n / 4;
  for (std::size_t j = 0; j < blocks; ++j) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + 4 * j));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = combine_lanes(lanes);
  for (std::size_t i = 4 * blocks; i < n; ++i) total += x[i];
  return total;
}

void channel_sums_rgb(const double* rgb, std::size_t pixels, double* sums) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd();
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const double* src = rgb + 12 * j;
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(src));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(src + 4));
    a2 = _mm256_add_pd(a2, _mm256_loadu_pd(src + 8));
  }
  alignas(32) double acc[12];
  _mm256_store_pd(acc, a0);
  _mm256_store_pd(acc + 4, a1);
  _mm256_store_pd(acc + 8, a2);
  for (std::size_t c = 0; c < 3; ++c) {
    sums[c] = (acc[c] + acc[c + 3]) + (acc[c + 6] + acc[c + 9]);
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    for (std::size_t c = 0; c < 3; ++c) sums[c] += rgb[3 * p + c];
  }
}

double weighted_sq_diff_sum(const double* w, const double* a, const double* b,
                            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t blocks = n / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    __m256d t = _mm256_sub_pd(_mm256_loadu_pd(a + 4 * j), _mm256_loadu_pd(b + 4 * j));
    if (w) t = _mm256_mul_pd(_mm256_loadu_pd(w + 4 * j), t);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = combine_lanes(lanes);
  for (std::size_t i = 4 * blocks; i < n; ++i) {
    const double d = a[i] - b[i];
    const double t = w ? w[i] * d : d;
    total += t * t;
  }
  return total;
}

void luminance_rgb(const double* rgb, double* out, std::size_t pixels) {
  const __m256i idx = _mm256_setr_epi64x(0, 3, 6, 9);
  const __m256d wr = _mm256_set1_pd(0.2126);
  const __m256d wg = _mm256_set1_pd(0.7152);
  const __m256d wb = _mm256_set1_pd(0.0722);
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const double* base = rgb + 12 * j;
    const __m256d r = _mm256_i64gather_pd(base, idx, 8);
    const __m256d g = _mm256_i64gather_pd(base + 1, idx, 8);
    const __m256d b = _mm256_i64gather_pd(base + 2, idx, 8);
    const __m256d v =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(wr, r), _mm256_mul_pd(wg, g)),
                      _mm256_mul_pd(wb, b));
    _mm256_storeu_pd(out + 4 * j, v);
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    out[p] = (0.2126 * rgb[3 * p] + 0.7152 * rgb[3 * p + 1]) + 0.0722 * rgb[3 * p + 2];
  }
}

// Four interleaved pixels as planar channel vectors.
struct Rgb4 {
  __m256d r, g, b;
};

inline Rgb4 load_rgb4(const double* p) {
  const __m256d v0 = _mm256_loadu_pd(p);      // r0 g0 b0 r1
  const __m256d v1 = _mm256_loadu_pd(p + 4);  // g1 b1 r2 g2
  const __m256d v2 = _mm256_loadu_pd(p + 8);  // b2 r3 g3 b3
  const __m256d a = _mm256_blend_pd(_mm256_blend_pd(v0, v1, 0b0100), v2, 0b0010);
  const __m256d b = _mm256_blend_pd(_mm256_blend_pd(v0, v1, 0b1001), v2, 0b0100);
  const __m256d c = _mm256_blend_pd(_mm256_blend_pd(v0, v1, 0b0010), v2, 0b1001);
  return {_mm256_permute4x64_pd(a, _MM_SHUFFLE(1, 2, 3, 0)),
          _mm256_permute4x64_pd(b, _MM_SHUFFLE(2, 3, 0, 1)),
          _mm256_permute4x64_pd(c, _MM_SHUFFLE(3, 0, 1, 2))};
}

inline void store_rgb4(double* p, const Rgb4& v) {
  const __m256d a = _mm256_permute4x64_pd(v.r, _MM_SHUFFLE(1, 2, 3, 0));
  const __m256d b = _mm256_permute4x64_pd(v.g, _MM_SHUFFLE(2, 3, 0, 1));
  const __m256d c = _mm256_permute4x64_pd(v.b, _MM_SHUFFLE(3, 0, 1, 2));
  _mm256_storeu_pd(p, _mm256_blend_pd(_mm256_blend_pd(a, b, 0b0010), c, 0b0100));
  _mm256_storeu_pd(p + 4, _mm256_blend_pd(_mm256_blend_pd(a, b, 0b1001), c, 0b0010));
  _mm256_storeu_pd(p + 8, _mm256_blend_pd(_mm256_blend_pd(a, c, 0b1001), b, 0b0100));
}

// Per-pixel values repeated over that pixel's three samples.
inline void expand_pixels(__m256d k, __m256d& e0, __m256d& e1, __m256d& e2) {
  e0 = _mm256_permute4x64_pd(k, _MM_SHUFFLE(1, 0, 0, 0));
  e1 = _mm256_permute4x64_pd(k, _MM_SHUFFLE(2, 2, 1, 1));
  e2 = _mm256_permute4x64_pd(k, _MM_SHUFFLE(3, 3, 3, 2));
}

inline __m256d select(__m256d mask, __m256d yes, __m256d no) {
  return _mm256_blendv_pd(no, yes, mask);
}
inline __m256d lt(__m256d a, __m256d b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
inline __m256d le(__m256d a, __m256d b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
inline __m256d gt(__m256d a, __m256d b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
inline __m256d ge(__m256d a, __m256d b) { return _mm256_cmp_pd(a, b, _CMP_GE_OQ); }
inline __m256d eq(__m256d a, __m256d b) { return _mm256_cmp_pd(a, b, _CMP_EQ_OQ); }
inline __m256d neg(__m256d a) { return _mm256_xor_pd(a, _mm256_set1_pd(-0.0)); }

inline __m256d hue_sextant4(const Rgb4& v, __m256d hi, __m256d chroma) {
  const __m256d six = _mm256_set1_pd(6.0);
  const __m256d is_r = eq(hi, v.r);
  const __m256d is_g = eq(hi, v.g);
  const __m256d num = select(is_r, _mm256_sub_pd(v.g, v.b),
                             select(is_g, _mm256_sub_pd(v.b, v.r), _mm256_sub_pd(v.r, v.g)));
  const __m256d offset = select(is_r, _mm256_setzero_pd(),
                                select(is_g, _mm256_set1_pd(2.0), _mm256_set1_pd(4.0)));
  __m256d h6 = _mm256_add_pd(_mm256_div_pd(num, chroma), offset);
  h6 = select(lt(h6, _mm256_setzero_pd()), _mm256_add_pd(h6, six), h6);
  return select(ge(h6, six), _mm256_sub_pd(h6, six), h6);
}

void weighted_gain_clamp_rgb(const double* in, double* out, const double* weight,
                             std::size_t pixels, double amount) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d a = _mm256_set1_pd(amount);
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const __m256d gain = _mm256_add_pd(one, _mm256_mul_pd(a, _mm256_loadu_pd(weight + 4 * j)));
    __m256d e0, e1, e2;
    expand_pixels(gain, e0, e1, e2);
    const double* src = in + 12 * j;
    double* dst = out + 12 * j;
    _mm256_storeu_pd(dst, clamp01_pd(_mm256_mul_pd(_mm256_loadu_pd(src), e0)));
    _mm256_storeu_pd(dst + 4, clamp01_pd(_mm256_mul_pd(_mm256_loadu_pd(src + 4), e1)));
    _mm256_storeu_pd(dst + 8, clamp01_pd(_mm256_mul_pd(_mm256_loadu_pd(src + 8), e2)));
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    const double gain = 1.0 + amount * weight[p];
    for (std::size_t c = 0; c < 3; ++c) out[3 * p + c] = clamp01(in[3 * p + c] * gain);
  }
}

void tone_toward_rgb(const double* in, double* out, const double* field, double peak,
                     double strength, const double* color, std::size_t pixels) {
  const __m256d c0 = _mm256_setr_pd(color[0], color[1], color[2], color[0]);
  const __m256d c1 = _mm256_setr_pd(color[1], color[2], color[0], color[1]);
  const __m256d c2 = _mm256_setr_pd(color[2], color[0], color[1], color[2]);
  const __m256d pk = _mm256_set1_pd(peak);
  const __m256d st = _mm256_set1_pd(strength);
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const __m256d k = _mm256_mul_pd(st, _mm256_div_pd(_mm256_loadu_pd(field + 4 * j), pk));
    __m256d e0, e1, e2;
    expand_pixels(k, e0, e1, e2);
    const double* src = in + 12 * j;
    double* dst = out + 12 * j;
    const __m256d v0 = _mm256_loadu_pd(src);
    const __m256d v1 = _mm256_loadu_pd(src + 4);
    const __m256d v2 = _mm256_loadu_pd(src + 8);
    _mm256_storeu_pd(dst, clamp01_pd(_mm256_add_pd(v0, _mm256_mul_pd(e0, _mm256_sub_pd(c0, v0)))));
    _mm256_storeu_pd(dst + 4,
                     clamp01_pd(_mm256_add_pd(v1, _mm256_mul_pd(e1, _mm256_sub_pd(c1, v1)))));
    _mm256_storeu_pd(dst + 8,
                     clamp01_pd(_mm256_add_pd(v2, _mm256_mul_pd(e2, _mm256_sub_pd(c2, v2)))));
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    const double k = strength * (field[p] / peak);
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = in[3 * p + c];
      out[3 * p + c] = clamp01(v + k * (color[c] - v));
    }
  }
}

void saturation_scale_rgb(const double* in, double* out, std::size_t pixels, double gain) {
  const __m256d gv = _mm256_set1_pd(gain);
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const Rgb4 v = load_rgb4(in + 12 * j);
    const __m256d hi = _mm256_max_pd(_mm256_max_pd(v.r, v.g), v.b);
    const __m256d lo = _mm256_min_pd(_mm256_min_pd(v.r, v.g), v.b);
    const __m256d live = gt(hi, lo);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(hi, lo), hi);
    const __m256d ratio = _mm256_div_pd(clamp01_pd(_mm256_mul_pd(gv, s)), s);
    auto move = [&](__m256d c) {
      return select(live, clamp01_pd(_mm256_sub_pd(hi, _mm256_mul_pd(_mm256_sub_pd(hi, c), ratio))),
                    c);
    };
    store_rgb4(out + 12 * j, {move(v.r), move(v.g), move(v.b)});
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    detail::saturation_scale_px(in + 3 * p, out + 3 * p, gain);
  }
}

void hue_shift_rgb(const double* in, double* out, std::size_t pixels, double fraction,
                   double target_hue) {
  const double t6s = 6.0 * target_hue;
  const __m256d t6 = _mm256_set1_pd(t6s);
  const __m256d fr = _mm256_set1_pd(fraction);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d mthree = _mm256_set1_pd(-3.0);
  const __m256d six = _mm256_set1_pd(6.0);
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const Rgb4 v = load_rgb4(in + 12 * j);
    const __m256d hi = _mm256_max_pd(_mm256_max_pd(v.r, v.g), v.b);
    const __m256d lo = _mm256_min_pd(_mm256_min_pd(v.r, v.g), v.b);
    const __m256d chroma = _mm256_sub_pd(hi, lo);
    const __m256d live = gt(chroma, zero);
    const __m256d h6 = hue_sextant4(v, hi, chroma);
    __m256d d = _mm256_sub_pd(t6, h6);
    d = select(gt(d, three), _mm256_sub_pd(d, six), d);
    d = select(le(d, mthree), _mm256_add_pd(d, six), d);
    __m256d nh = _mm256_add_pd(h6, _mm256_mul_pd(fr, d));
    nh = select(lt(nh, zero), _mm256_add_pd(nh, six), nh);
    nh = select(ge(nh, six), _mm256_sub_pd(nh, six), nh);
    auto channel = [&](double phase) {
      __m256d k = _mm256_add_pd(nh, _mm256_set1_pd(phase));
      k = select(ge(k, six), _mm256_sub_pd(k, six), k);
      __m256d m = _mm256_min_pd(k, _mm256_sub_pd(_mm256_set1_pd(4.0), k));
      m = _mm256_min_pd(m, _mm256_set1_pd(1.0));
      m = _mm256_max_pd(m, zero);
      return clamp01_pd(_mm256_sub_pd(hi, _mm256_mul_pd(chroma, m)));
    };
    const __m256d r = channel(5.0);
    const __m256d g = channel(3.0);
    const __m256d b = channel(1.0);
    store_rgb4(out + 12 * j, {select(live, r, v.r), select(live, g, v.g), select(live, b, v.b)});
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    detail::hue_shift_px(in + 3 * p, out + 3 * p, fraction, t6s);
  }
}

void saturation_rgb(const double* rgb, double* out, std::size_t pixels) {
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const Rgb4 v = load_rgb4(rgb + 12 * j);
    const __m256d hi = _mm256_max_pd(_mm256_max_pd(v.r, v.g), v.b);
    const __m256d lo = _mm256_min_pd(_mm256_min_pd(v.r, v.g), v.b);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(hi, lo), hi);
    _mm256_storeu_pd(out + 4 * j, select(gt(hi, zero), s, zero));
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) out[p] = detail::saturation_px(rgb + 3 * p);
}

void hue_embedding_rgb(const double* rgb, double* cos_out, double* sin_out,
                       std::size_t pixels) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const std::size_t blocks = pixels / 4;
  for (std::size_t j = 0; j < blocks; ++j) {
    const Rgb4 v = load_rgb4(rgb + 12 * j);
    const __m256d hi = _mm256_max_pd(_mm256_max_pd(v.r, v.g), v.b);
    const __m256d lo = _mm256_min_pd(_mm256_min_pd(v.r, v.g), v.b);
    const __m256d chroma = _mm256_sub_pd(hi, lo);
    const __m256d live = gt(chroma, zero);
    const __m256d s = _mm256_div_pd(chroma, hi);
    const __m256d u = _mm256_mul_pd(hue_sextant4(v, hi, chroma), _mm256_set1_pd(2.0 / 3.0));
    const __m256d q = _mm256_floor_pd(_mm256_add_pd(u, _mm256_set1_pd(0.5)));
    const __m256d phi = _mm256_mul_pd(_mm256_sub_pd(u, q), _mm256_set1_pd(detail::kHalfPi));
    const __m256d z = _mm256_mul_pd(phi, phi);
    __m256d ps = _mm256_set1_pd(detail::kSin[6]);
    for (int i = 5; i >= 0; --i) ps = _mm256_add_pd(_mm256_set1_pd(detail::kSin[i]), _mm256_mul_pd(z, ps));
    const __m256d sn = _mm256_add_pd(phi, _mm256_mul_pd(phi, _mm256_mul_pd(z, ps)));
    __m256d pc = _mm256_set1_pd(detail::kCos[7]);
    for (int i = 6; i >= 0; --i) pc = _mm256_add_pd(_mm256_set1_pd(detail::kCos[i]), _mm256_mul_pd(z, pc));
    const __m256d cs = _mm256_add_pd(one, _mm256_mul_pd(z, pc));
    const __m256d q1 = eq(q, one);
    const __m256d q2 = eq(q, _mm256_set1_pd(2.0));
    const __m256d q3 = eq(q, _mm256_set1_pd(3.0));
    __m256d c = cs;
    __m256d sv = sn;
    c = select(q3, sn, c);
    sv = select(q3, neg(cs), sv);
    c = select(q2, neg(cs), c);
    sv = select(q2, neg(sn), sv);
    c = select(q1, neg(sn), c);
    sv = select(q1, cs, sv);
    _mm256_storeu_pd(cos_out + 4 * j, select(live, _mm256_mul_pd(s, c), zero));
    _mm256_storeu_pd(sin_out + 4 * j, select(live, _mm256_mul_pd(s, sv), zero));
  }
  for (std::size_t p = 4 * blocks; p < pixels; ++p) {
    detail::hue_embed_px(rgb + 3 * p, cos_out + p, sin_out + p);
  }
}

void gradient_magnitude(const double* in, double* out, std::size_t width, std::size_t height) {
  const __m256d half = _mm256_set1_pd(0.5);
  for (std::size_t y = 0; y < height; ++y) {
    if (y == 0 || y + 1 >= height || width < 3) {
      detail::gradient_span(in, out, width, height, y, 0, width);
      continue;
    }
    const double* row = in + y * width;
    const double* up = row - width;
    const double* down = row + width;
    double* dst = out + y * width;
    detail::gradient_span(in, out, width, height, y, 0, 1);
    std::size_t x = 1;
    for (; x + 4 <= width - 1; x += 4) {
      const __m256d dx =
          _mm256_mul_pd(half, _mm256_sub_pd(_mm256_loadu_pd(row + x + 1), _mm256_loadu_pd(row + x - 1)));
      const __m256d dy =
          _mm256_mul_pd(half, _mm256_sub_pd(_mm256_loadu_pd(down + x), _mm256_loadu_pd(up + x)));
      _mm256_storeu_pd(dst + x,
                       _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy))));
    }
    detail::gradient_span(in, out, width, height, y, x, width);
  }
}

const KernelTable kAvx2{
    .name = "avx2",
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

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace pif::kernels
