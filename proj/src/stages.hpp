#pragma once

#include <cstddef>
#include <vector>

#include "pif/concepts.hpp"

namespace pif::detail {

// Reusable buffers for in-place adjustment stages.
struct StageScratch {
  std::vector<double> blur;
  std::vector<double> tmp;
  std::vector<double> field;
  std::vector<double> vignette;
  std::size_t vignette_width = 0;
  std::size_t vignette_height = 0;
  // Blur of the buffer handed to the sharpness stage, when the caller already has it.
  const std::vector<double>* known_blur = nullptr;
};

// Clamped separable Gaussian blur of an interleaved RGB buffer. kernel_size must be odd.
void blur_rgb(const double* in, double* out, std::vector<double>& tmp, std::size_t width,
              std::size_t height, int kernel_size);

// Applies one adjustment to `px` in place. `value` must be valid and non-neutral.
void adjust_in_place(ConceptId id, double* px, std::size_t width, std::size_t height,
                     const ConceptValue& value, const ConceptThresholds& thresholds,
                     StageScratch& scratch);

// Stages first..last (ordinals) in order, skipping neutral values.
void run_stages_in_place(double* px, std::size_t width, std::size_t height,
                         const ConceptParams& params, int first, int last,
                         const ConceptThresholds& thresholds, StageScratch& scratch);

}  // namespace pif::detail
