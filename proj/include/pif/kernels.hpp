#pragma once

// Data-parallel pixel kernels. Each entry has a scalar reference
// implementation and, where the CPU supports it, an AVX2 variant. The
// variants are numerically identical: elementwise kernels evaluate the same
// expression per sample, convolutions accumulate taps in the same order, and
// reductions use a fixed 4-lane accumulation pattern on both paths.

#include <cstddef>
#include <string_view>

namespace pif::kernels {

struct KernelTable {
  std::string_view name;

  // out[i] = clamp(pivot[c] + gain[c] * (in[i] - pivot[c]), 0, 1) with c = i % 3.
  void (*affine_clamp_rgb)(const double* in, double* out, std::size_t pixels,
                           const double* pivot, const double* gain);

  // out[i] = clamp((amount + 1) * in[i] - amount * blurred[i], 0, 1).
  void (*unsharp_clamp)(const double* in, const double* blurred, double* out,
                        std::size_t n, double amount);

  // Horizontal pass over rows of `channels`-interleaved samples, replicate border.
  // taps has 2 * radius + 1 entries.
  void (*convolve_rows)(const double* in, double* out, std::size_t width,
                        std::size_t height, std::size_t channels,
                        const double* taps, std::size_t radius);

  // Vertical pass; row_len is the number of samples per row.
  void (*convolve_cols)(const double* in, double* out, std::size_t row_len,
                        std::size_t height, const double* taps, std::size_t radius);

  // Sum of n values.
  double (*sum)(const double* x, std::size_t n);

  // Per-channel sums of interleaved RGB; writes sums[0..2].
  void (*channel_sums_rgb)(const double* rgb, std::size_t pixels, double* sums);

  // Sum of (w[i] * (a[i] - b[i]))^2; w may be null (treated as all ones).
  double (*weighted_sq_diff_sum)(const double* w, const double* a, const double* b,
                                 std::size_t n);

  // out[p] = 0.2126 r + 0.7152 g + 0.0722 b.
  void (*luminance_rgb)(const double* rgb, double* out, std::size_t pixels);

  // out = clamp(in * (1 + amount * weight[p]), 0, 1) per sample of pixel p.
  void (*weighted_gain_clamp_rgb)(const double* in, double* out, const double* weight,
                                  std::size_t pixels, double amount);

  // out = clamp(in + k (color - in), 0, 1) with k = strength * (field[p] / peak); peak > 0.
  void (*tone_toward_rgb)(const double* in, double* out, const double* field, double peak,
                          double strength, const double* color, std::size_t pixels);

  // Scales HSV saturation by gain (clamped to [0,1]) at fixed hue and value.
  void (*saturation_scale_rgb)(const double* in, double* out, std::size_t pixels, double gain);

  // Moves each chromatic pixel's hue the given fraction of the shortest arc toward
  // target_hue, at fixed saturation and value. Ties at half a turn go toward increasing hue.
  void (*hue_shift_rgb)(const double* in, double* out, std::size_t pixels, double fraction,
                        double target_hue);

  // HSV saturation of each pixel.
  void (*saturation_rgb)(const double* rgb, double* out, std::size_t pixels);

  // (s cos 2 pi h, s sin 2 pi h) of each pixel's HSV hue h and saturation s.
  void (*hue_embedding_rgb)(const double* rgb, double* cos_out, double* sin_out,
                            std::size_t pixels);

  // Central-difference gradient magnitude with replicate border.
  void (*gradient_magnitude)(const double* in, double* out, std::size_t width,
                             std::size_t height);
};

/// Portable reference implementation; always available.
const KernelTable& scalar();

/// AVX2 implementation, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* avx2();

/// The table used by the library. Chosen once: AVX2 when available unless the
/// environment variable PIF_FORCE_SCALAR is set to a non-empty value other than "0".
const KernelTable& active();

}  // namespace pif::kernels
