#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pif/concepts.hpp"
#include "pif/image.hpp"
#include "pif/pcturb.hpp"

namespace pif {

struct FitConfig {
  int max_outer_iterations = 200;
  int subset_size = 2;
  int line_search_evals = 16;
  double convergence_tol = 1e-3;
  std::uint64_t seed = 0;
  std::size_t downsample_long_edge = 512;
  double loss_edge_weight = 0.1;

  /// OutOfRange on nonpositive counts, subset size outside [1,8] or nonpositive tol.
  void validate() const;
};

struct FitReport {
  double final_loss = 0.0;
  std::vector<std::pair<int, double>> loss_history;  ///< (iteration, full-subset loss)
  std::array<double, kConceptCount> per_concept_residual{};  ///< indexed by index_of()
  bool converged = false;
  std::size_t evaluations = 0;
  int iterations = 0;
};

struct FitProgress {
  int iteration = 0;
  double loss = 0.0;
  ConceptParams params;
};

/// Called synchronously on the fitting thread, once per outer iteration, in order.
using FitProgressCallback = std::function<void(const FitProgress&)>;

struct FitResult {
  StylePreset preset;
  FitReport report;
};

/// Per-concept feature read by the weighted loss: one field for scalar readings,
/// two for the saturation-weighted hue embedding, three for RGB.
std::vector<ScalarField> concept_feature(ConceptId concept_id, const RasterImage& img,
                                         const ConceptThresholds& thresholds = {});

/// Reference-side quantities of the weighted loss, computed once per reference.
struct LossTargets {
  std::array<ScalarField, kConceptCount> weights;
  std::array<std::vector<ScalarField>, kConceptCount> features;
  ScalarField gradient;
  std::size_t width = 0;
  std::size_t height = 0;
};

LossTargets make_loss_targets(const RasterImage& reference,
                              const ConceptThresholds& thresholds = {});

/// Loss terms of one comparison; `concept_terms` holds the RMS term of each concept in
/// the subset (zero for concepts outside it).
struct LossBreakdown {
  double total = 0.0;
  double edge = 0.0;
  std::array<double, kConceptCount> concept_terms{};
};

LossBreakdown weighted_loss_terms(const LossTargets& targets, const RasterImage& rendered,
                                  ConceptMask subset, const ConceptThresholds& thresholds,
                                  double edge_weight);

/// Sum over the subset of RMS(W_p(ref) * (F_p(ref) - F_p(rendered))) plus
/// edge_weight * RMS(grad ref - grad rendered). DimensionMismatch on size mismatch.
double weighted_loss(const RasterImage& reference, const RasterImage& rendered,
                     ConceptMask subset, const ConceptThresholds& thresholds = {},
                     double edge_weight = 0.1);

struct LineMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search on [lo, hi] using exactly `evals` evaluations (at least 2).
/// Returns the best evaluated point; ties favor the smaller abscissa.
LineMinimum golden_section_minimize(const std::function<double(double)>& fn, double lo,
                                    double hi, int evals);

/// One optimizable scalar inside ConceptParams.
struct ParamComponent {
  enum class Kind { Xi, Strength, Hue };
  ConceptId concept_id;
  Kind kind;
};

std::vector<ParamComponent> components_of(ConceptId id);
double get_component(const ConceptParams& params, ParamComponent c) noexcept;
void set_component(ConceptParams& params, ParamComponent c, double value) noexcept;

/// Learns a preset from references by coordinate search over concept parameters.
/// InvalidArgument when `references` is empty, DegenerateImage when every
/// reference is constant.
FitResult fit_style(std::span<const RasterImage> references, const FitConfig& config = {},
                    const ConceptThresholds& thresholds = {},
                    const FitProgressCallback& progress = {});

/// Same search, rendering each reference's given anchor instead of its neutralization.
/// Anchors are downsampled like the references and must match their sizes.
FitResult fit_style_with_anchors(std::span<const RasterImage> references,
                                 std::span<const RasterImage> anchors,
                                 const FitConfig& config = {},
                                 const ConceptThresholds& thresholds = {},
                                 const FitProgressCallback& progress = {});

}  // namespace pif
