#include "pif/fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pif/digest.hpp"
#include "pif/error.hpp"
#include "pif/kernels.hpp"
#include "stages.hpp"

namespace pif {
namespace {

// Updates that improve the objective by less than this fraction are rejected;
// otherwise line-search jitter keeps a converged fit from ever settling.
constexpr double kMinRelativeImprovement = 1e-6;

// Strength used while scanning hues of a concept that is currently switched off.
constexpr double kHueProbeStrength = 0.25;

ScalarField saturation_field(const RasterImage& img) {
  ScalarField s(img.width(), img.height());
  kernels::active().saturation_rgb(img.samples().data(), s.values().data(), s.size());
  return s;
}

std::vector<ScalarField> hue_embedding(const RasterImage& img) {
  ScalarField c(img.width(), img.height());
  ScalarField s(img.width(), img.height());
  kernels::active().hue_embedding_rgb(img.samples().data(), c.values().data(),
                                      s.values().data(), c.size());
  return {std::move(c), std::move(s)};
}

std::vector<ScalarField> rgb_fields(const RasterImage& img) {
  std::vector<ScalarField> out(3, ScalarField(img.width(), img.height()));
  const auto px = img.samples();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) out[c][i] = px[3 * i + c];
  }
  return out;
}

double rms(double sum_sq, std::size_t n) { return std::sqrt(sum_sq / static_cast<double>(n)); }

// Buffers reused across loss evaluations.
struct LossScratch {
  std::vector<double> lum;
  std::vector<double> grad;
  std::vector<double> feature;
};

LossBreakdown loss_terms(const LossTargets& targets, const double* px, std::size_t width,
                         std::size_t height, ConceptMask subset, double edge_weight,
                         LossScratch& scratch) {
  if (width != targets.width || height != targets.height) {
    throw Error(ErrorCode::DimensionMismatch, "reference and rendered sizes differ");
  }
  const auto& k = kernels::active();
  const std::size_t n = width * height;
  scratch.lum.resize(n);
  scratch.grad.resize(n);
  k.luminance_rgb(px, scratch.lum.data(), n);
  k.gradient_magnitude(scratch.lum.data(), scratch.grad.data(), width, height);

  LossBreakdown out;
  for (ConceptId id : subset.members()) {
    const std::size_t i = index_of(id);
    const ScalarField& w = targets.weights[i];
    const auto& f = targets.features[i];
    double sum_sq = 0.0;
    switch (id) {
      case ConceptId::Sharpness:
        sum_sq = k.weighted_sq_diff_sum(w.values().data(), f[0].values().data(),
                                        scratch.grad.data(), n);
        break;
      case ConceptId::Vignetting:
      case ConceptId::Exposure:
      case ConceptId::Contrast:
        sum_sq = k.weighted_sq_diff_sum(w.values().data(), f[0].values().data(),
                                        scratch.lum.data(), n);
        break;
      case ConceptId::Saturation:
        scratch.feature.resize(n);
        k.saturation_rgb(px, scratch.feature.data(), n);
        sum_sq = k.weighted_sq_diff_sum(w.values().data(), f[0].values().data(),
                                        scratch.feature.data(), n);
        break;
      case ConceptId::Tint:
        // W4 is identically one.
        scratch.feature.resize(2 * n);
        k.hue_embedding_rgb(px, scratch.feature.data(), scratch.feature.data() + n, n);
        sum_sq = k.weighted_sq_diff_sum(nullptr, f[0].values().data(), scratch.feature.data(), n) +
                 k.weighted_sq_diff_sum(nullptr, f[1].values().data(),
                                        scratch.feature.data() + n, n);
        break;
      case ConceptId::Highlight:
      case ConceptId::Shadow: {
        for (std::size_t p = 0; p < n; ++p) {
          const double wp = w[p];
          if (wp == 0.0) continue;
          double d2 = 0.0;
          for (std::size_t c = 0; c < 3; ++c) {
            const double d = f[c][p] - px[3 * p + c];
            d2 += d * d;
          }
          sum_sq += wp * wp * d2;
        }
        break;
      }
    }
    out.concept_terms[i] = rms(sum_sq, n);
    out.total += out.concept_terms[i];
  }
  out.edge = edge_weight * rms(k.weighted_sq_diff_sum(nullptr, targets.gradient.values().data(),
                                                        scratch.grad.data(), n),
                               n);
  out.total += out.edge;
  return out;
}

// Sum of squared RMS terms. Squaring keeps the minimizer but removes the
// ridges along which an unsquared term is non-differentiable.
double squared_terms(const LossBreakdown& terms) {
  double total = terms.edge * terms.edge;
  for (double t : terms.concept_terms) total += t * t;
  return total;
}

void sample_subset(std::mt19937_64& rng, int k, ConceptMask& out) {
  std::array<ConceptId, kConceptCount> pool = kAllConcepts;
  out = ConceptMask::none();
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), kConceptCount - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
    out.insert(pool[static_cast<std::size_t>(i)]);
  }
}

struct PreparedReference {
  RasterImage anchor;
  LossTargets targets;
  std::vector<double> anchor_blur;
  std::vector<double> prefix;
};

// The fitting objective: sum over references of the squared loss terms of
// perturb(anchor, params) against the reference. Stages before `first_` are
// cached per line search.
class Objective {
 public:
  Objective(std::vector<PreparedReference> refs, const ConceptThresholds& thresholds,
            double edge_weight)
      : refs_(std::move(refs)), thresholds_(thresholds), edge_weight_(edge_weight) {
    for (auto& r : refs_) {
      const RasterImage& a = r.anchor;
      r.anchor_blur.resize(a.samples().size());
      detail::blur_rgb(a.samples().data(), r.anchor_blur.data(), stage_.tmp, a.width(),
                       a.height(), thresholds_.sharpness_kernel);
    }
  }

  void fix_prefix(const ConceptParams& params, ConceptId first) {
    first_ = first;
    for (auto& r : refs_) {
      r.prefix.assign(r.anchor.samples().begin(), r.anchor.samples().end());
      render(r, r.prefix, params, 1, ordinal(first) - 1);
    }
  }

  double operator()(const ConceptParams& params, ConceptMask subset) {
    ++evaluations_;
    double total = 0.0;
    for (auto& r : refs_) {
      buffer_.assign(r.prefix.begin(), r.prefix.end());
      render(r, buffer_, params, ordinal(first_), 8);
      const LossBreakdown terms = loss_terms(r.targets, buffer_.data(), r.anchor.width(),
                                             r.anchor.height(), subset, edge_weight_, loss_);
      total += squared_terms(terms);
    }
    return total;
  }

  std::array<double, kConceptCount> residuals(const ConceptParams& params) {
    std::array<double, kConceptCount> out{};
    for (auto& r : refs_) {
      buffer_.assign(r.anchor.samples().begin(), r.anchor.samples().end());
      render(r, buffer_, params, 1, 8);
      const auto terms = loss_terms(r.targets, buffer_.data(), r.anchor.width(),
                                    r.anchor.height(), ConceptMask::all(), edge_weight_, loss_);
      for (std::size_t i = 0; i < kConceptCount; ++i) out[i] += terms.concept_terms[i];
    }
    return out;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  // Stage 1 always sees the anchor, so its blur is computed once.
  void render(const PreparedReference& r, std::vector<double>& px, const ConceptParams& params,
              int first, int last) {
    if (first > last) return;
    stage_.known_blur = first == 1 ? &r.anchor_blur : nullptr;
    detail::run_stages_in_place(px.data(), r.anchor.width(), r.anchor.height(), params, first,
                                last, thresholds_, stage_);
    stage_.known_blur = nullptr;
  }

  std::vector<PreparedReference> refs_;
  ConceptThresholds thresholds_;
  double edge_weight_;
  ConceptId first_ = ConceptId::Sharpness;
  std::size_t evaluations_ = 0;
  std::vector<double> buffer_;
  detail::StageScratch stage_;
  LossScratch loss_;
};

// Spends one of `evals` evaluations on the neutral value and the rest on a golden-section
// search, so a component can return exactly to neutral. Neutral wins ties.
LineMinimum with_neutral_probe(const std::function<double(double)>& fn, double lo, double hi,
                               double neutral, int evals) {
  LineMinimum best = golden_section_minimize(fn, lo, hi, std::max(evals - 1, 2));
  const double at_neutral = fn(neutral);
  ++best.evaluations;
  if (at_neutral <= best.value) {
    best.x = neutral;
    best.value = at_neutral;
  }
  return best;
}

bool improves(double candidate, double current) {
  return candidate < current - kMinRelativeImprovement * std::abs(current);
}

// Final bracket width of a golden-section search over `width` with `evals` evaluations.
double search_resolution(double width, int evals) {
  return width * std::pow((std::sqrt(5.0) - 1.0) / 2.0, std::max(evals - 2, 0));
}

// Update size of one concept relative to what its line search can resolve. Hue moves
// count in proportion to strength, since hue is unobservable at zero strength.
double normalized_change(ConceptId id, const ConceptParams& before, const ConceptParams& after,
                         double tol, int evals) {
  const ConceptValue b = before.get(id);
  const ConceptValue a = after.get(id);
  if (const auto* sb = std::get_if<Scalar>(&b)) {
    return std::abs(std::get<Scalar>(a).xi - sb->xi) / std::max(tol, search_resolution(2.0, evals - 1));
  }
  const auto& hb = std::get<StrengthHue>(b);
  const auto& ha = std::get<StrengthHue>(a);
  const double ds = std::abs(ha.strength - hb.strength) / std::max(tol, search_resolution(1.0, evals - 1));
  const double dh = hue_distance(ha.hue, hb.hue) * std::max(ha.strength, hb.strength) / tol;
  return std::max(ds, dh);
}

}  // namespace

void FitConfig::validate() const {
  if (max_outer_iterations < 1) throw Error(ErrorCode::OutOfRange, "max_outer_iterations must be >= 1");
  if (subset_size < 1 || subset_size > static_cast<int>(kConceptCount)) {
    throw Error(ErrorCode::OutOfRange, "subset_size must be in [1, 8]");
  }
  if (line_search_evals < 2) throw Error(ErrorCode::OutOfRange, "line_search_evals must be >= 2");
  if (!(convergence_tol > 0.0)) throw Error(ErrorCode::OutOfRange, "convergence_tol must be > 0");
  if (downsample_long_edge < 1) throw Error(ErrorCode::OutOfRange, "downsample_long_edge must be >= 1");
  if (!(loss_edge_weight >= 0.0)) throw Error(ErrorCode::OutOfRange, "loss_edge_weight must be >= 0");
}

std::vector<ScalarField> concept_feature(ConceptId concept_id, const RasterImage& img,
                                         const ConceptThresholds&) {
  switch (concept_id) {
    case ConceptId::Sharpness: return {gradient_magnitude(img)};
    case ConceptId::Vignetting:
    case ConceptId::Exposure:
    case ConceptId::Contrast: return {luminance(img)};
    case ConceptId::Saturation: return {saturation_field(img)};
    case ConceptId::Tint: return hue_embedding(img);
    case ConceptId::Highlight:
    case ConceptId::Shadow: return rgb_fields(img);
  }
  return {};
}

LossTargets make_loss_targets(const RasterImage& reference, const ConceptThresholds& thresholds) {
  LossTargets t;
  t.width = reference.width();
  t.height = reference.height();
  const ScalarField lum = luminance(reference);
  t.gradient = gradient_magnitude(lum);
  for (ConceptId id : kAllConcepts) {
    const std::size_t i = index_of(id);
    t.weights[i] = weight_map(id, reference, thresholds);
    switch (id) {
      case ConceptId::Sharpness: t.features[i] = {t.gradient}; break;
      case ConceptId::Vignetting:
      case ConceptId::Exposure:
      case ConceptId::Contrast: t.features[i] = {lum}; break;
      case ConceptId::Saturation: t.features[i] = {saturation_field(reference)}; break;
      case ConceptId::Tint: t.features[i] = hue_embedding(reference); break;
      case ConceptId::Highlight:
      case ConceptId::Shadow: t.features[i] = rgb_fields(reference); break;
    }
  }
  return t;
}

LossBreakdown weighted_loss_terms(const LossTargets& targets, const RasterImage& rendered,
                                  ConceptMask subset, const ConceptThresholds&,
                                  double edge_weight) {
  LossScratch scratch;
  return loss_terms(targets, rendered.samples().data(), rendered.width(), rendered.height(),
                    subset, edge_weight, scratch);
}

double weighted_loss(const RasterImage& reference, const RasterImage& rendered,
                     ConceptMask subset, const ConceptThresholds& thresholds,
                     double edge_weight) {
  if (reference.width() != rendered.width() || reference.height() != rendered.height()) {
    throw Error(ErrorCode::DimensionMismatch, "reference and rendered sizes differ");
  }
  return weighted_loss_terms(make_loss_targets(reference, thresholds), rendered, subset,
                             thresholds, edge_weight)
      .total;
}

LineMinimum golden_section_minimize(const std::function<double(double)>& fn, double lo,
                                    double hi, int evals) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  evals = std::max(evals, 2);
  LineMinimum best;
  auto consider = [&](double x, double fx) {
    if (best.evaluations == 0 || fx < best.value || (fx == best.value && x < best.x)) {
      best.x = x;
      best.value = fx;
    }
    ++best.evaluations;
  };

  double a = lo;
  double b = hi;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = fn(x1);
  consider(x1, f1);
  double f2 = fn(x2);
  consider(x2, f2);
  while (best.evaluations < evals) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = fn(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = fn(x2);
      consider(x2, f2);
    }
  }
  return best;
}

std::vector<ParamComponent> components_of(ConceptId id) {
  if (is_hue_concept(id)) {
    return {{id, ParamComponent::Kind::Strength}, {id, ParamComponent::Kind::Hue}};
  }
  return {{id, ParamComponent::Kind::Xi}};
}

double get_component(const ConceptParams& params, ParamComponent c) noexcept {
  const ConceptValue v = params.get(c.concept_id);
  switch (c.kind) {
    case ParamComponent::Kind::Xi: return std::get<Scalar>(v).xi;
    case ParamComponent::Kind::Strength: return std::get<StrengthHue>(v).strength;
    case ParamComponent::Kind::Hue: return std::get<StrengthHue>(v).hue;
  }
  return 0.0;
}

void set_component(ConceptParams& params, ParamComponent c, double value) noexcept {
  ConceptValue v = params.get(c.concept_id);
  switch (c.kind) {
    case ParamComponent::Kind::Xi: std::get<Scalar>(v).xi = value; break;
    case ParamComponent::Kind::Strength: std::get<StrengthHue>(v).strength = value; break;
    case ParamComponent::Kind::Hue: std::get<StrengthHue>(v).hue = wrap_hue(value); break;
  }
  params.set(c.concept_id, v);
}

namespace {

FitResult run_fit(std::span<const RasterImage> references,
                  std::span<const RasterImage> anchors, const FitConfig& config,
                  const ConceptThresholds& thresholds, const FitProgressCallback& progress) {
  config.validate();
  thresholds.validate();
  if (references.empty()) throw Error(ErrorCode::InvalidArgument, "no reference images");

  std::vector<PreparedReference> prepared;
  std::vector<std::string> digests;
  for (std::size_t r = 0; r < references.size(); ++r) {
    const RasterImage& ref = references[r];
    digests.push_back(image_digest(ref));
    RasterImage small = downsample_long_edge(ref, config.downsample_long_edge);
    if (is_constant_image(small)) continue;
    RasterImage anchor = anchors.empty()
                             ? neutralize(small)
                             : downsample_long_edge(anchors[r], config.downsample_long_edge);
    PreparedReference p{std::move(anchor), make_loss_targets(small, thresholds), {}, {}};
    prepared.push_back(std::move(p));
  }
  if (prepared.empty()) {
    throw Error(ErrorCode::DegenerateImage, "every reference image is constant");
  }

  Objective objective(std::move(prepared), thresholds, config.loss_edge_weight);
  ConceptParams params = neutral_params();
  std::mt19937_64 rng(config.seed);
  FitReport report;

  unsigned window_visited = 0;
  double window_change = 0.0;
  const int n = config.line_search_evals;

  objective.fix_prefix(params, ConceptId::Sharpness);
  double full_loss = objective(params, ConceptMask::all());

  for (int iteration = 1; iteration <= config.max_outer_iterations; ++iteration) {
    ConceptMask subset;
    sample_subset(rng, config.subset_size, subset);

    for (ConceptId id : subset.members()) {
      objective.fix_prefix(params, id);
      // Line search of this concept's components against the loss over `mask`.
      auto search = [&](ConceptMask mask) {
        ConceptParams candidate = params;
        if (!is_hue_concept(id)) {
          const ParamComponent xi{id, ParamComponent::Kind::Xi};
          auto at = [&](double x) {
            ConceptParams trial = params;
            set_component(trial, xi, x);
            return objective(trial, mask);
          };
          const LineMinimum m = with_neutral_probe(at, -1.0, 1.0, 0.0, n);
          set_component(candidate, xi, m.x);
          return std::pair{candidate, m.value};
        }
        const ParamComponent strength{id, ParamComponent::Kind::Strength};
        const ParamComponent hue{id, ParamComponent::Kind::Hue};
        const double probe = std::max(get_component(params, strength), kHueProbeStrength);
        auto at_hue = [&](double h) {
          ConceptParams trial = params;
          set_component(trial, strength, probe);
          set_component(trial, hue, h);
          return objective(trial, mask);
        };
        // Coarse scan over the circle, smallest hue wins ties, then local refinement.
        double best_hue = 0.0;
        double best_value = at_hue(0.0);
        for (int k = 1; k < n; ++k) {
          const double h = static_cast<double>(k) / n;
          const double v = at_hue(h);
          if (v < best_value) {
            best_value = v;
            best_hue = h;
          }
        }
        const double step = 1.0 / n;
        const LineMinimum refined =
            golden_section_minimize(at_hue, best_hue - step, best_hue + step, n);
        if (refined.value < best_value) best_hue = wrap_hue(refined.x);
        set_component(candidate, hue, best_hue);

        const LineMinimum m = with_neutral_probe(
            [&](double s) {
              ConceptParams trial = candidate;
              set_component(trial, strength, s);
              return objective(trial, mask);
            },
            0.0, 1.0, 0.0, n);
        set_component(candidate, strength, m.x);
        return std::pair{candidate, m.value};
      };

      // Accept on improvement of the subset loss; the full loss only feeds the history.
      const double current = objective(params, subset);
      const auto [candidate, value] = search(subset);
      double change = 0.0;
      if (improves(value, current)) {
        change = normalized_change(id, params, candidate, config.convergence_tol, n);
        params = candidate;
        full_loss = objective(params, ConceptMask::all());
      }
      window_visited |= 1u << index_of(id);
      window_change = std::max(window_change, change);
    }

    const double full = full_loss;
    report.loss_history.emplace_back(iteration, full);
    report.iterations = iteration;
    if (progress) progress(FitProgress{iteration, full, params});

    if (window_visited == 0xFFu) {
      if (window_change < 1.0) {
        report.converged = true;
        break;
      }
      window_visited = 0;
      window_change = 0.0;
    }
  }

  report.final_loss = report.loss_history.back().second;
  report.per_concept_residual = objective.residuals(params);
  report.evaluations = objective.evaluations();

  FitResult result;
  result.preset.name = "fitted";
  result.preset.created_at = format_rfc3339(0);
  result.preset.params = params;
  result.preset.thresholds = thresholds;
  result.preset.fit_meta = FitMeta{std::move(digests), report.final_loss, config.seed,
                                   report.iterations};
  result.report = std::move(report);
  return result;
}

}  // namespace

FitResult fit_style(std::span<const RasterImage> references, const FitConfig& config,
                    const ConceptThresholds& thresholds, const FitProgressCallback& progress) {
  return run_fit(references, {}, config, thresholds, progress);
}

FitResult fit_style_with_anchors(std::span<const RasterImage> references,
                                 std::span<const RasterImage> anchors, const FitConfig& config,
                                 const ConceptThresholds& thresholds,
                                 const FitProgressCallback& progress) {
  if (anchors.size() != references.size()) {
    throw Error(ErrorCode::InvalidArgument, "need exactly one anchor per reference");
  }
  for (std::size_t r = 0; r < references.size(); ++r) {
    if (anchors[r].width() != references[r].width() ||
        anchors[r].height() != references[r].height()) {
      throw Error(ErrorCode::DimensionMismatch, "anchor and reference sizes differ");
    }
  }
  return run_fit(references, anchors, config, thresholds, progress);
}

}  // namespace pif
