#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "otmedian/barycenter.hpp"
#include "otmedian/distances.hpp"
#include "otmedian/errors.hpp"
#include "otmedian/measures.hpp"
#include "otmedian/sinkhorn.hpp"

namespace otmedian {

/// A metric space of measures in which weighted barycenters can be solved.
/// `previous` is the current outer iterate (nullptr on the first solve) and
/// may be used as a warm start.
template <typename A>
concept SpaceAdapter = requires(A& adapter, const typename A::Measure& m,
                                const std::vector<typename A::Measure>& inputs,
                                const SimplexWeights& w) {
  { adapter.distance(m, m) } -> std::convertible_to<double>;
  { adapter.barycenter(w, inputs, &m) } -> std::same_as<typename A::Measure>;
  { adapter.discrepancy(m, m) } -> std::convertible_to<double>;
};

/// Adapters with an inexact barycenter solver may expose `bool refine()`,
/// which tightens it and returns false once nothing tighter is available.
template <typename A>
concept RefinableSpace = requires(A& adapter) {
  { adapter.refine() } -> std::convertible_to<bool>;
};

enum class IrlsInit { uniform_barycenter, given };

struct IrlsConfig {
  int max_outer = 100;
  double discrepancy_tol = 1e-8;
  double coincidence_tol = 1e-12;  // relative to the mean pairwise input distance
  IrlsInit initializer = IrlsInit::uniform_barycenter;

  void validate() const {
    if (max_outer < 1) throw InvalidInput("irls: max_outer must be >= 1");
    if (!(discrepancy_tol > 0.0)) throw InvalidInput("irls: discrepancy_tol must be > 0");
    if (!(coincidence_tol > 0.0)) throw InvalidInput("irls: coincidence_tol must be > 0");
  }
};

enum class Termination { converged, coincided_with_input, max_iterations };

std::string_view to_string(Termination t) noexcept;

template <typename M>
struct MedianResult {
  M centroid;
  std::vector<double> objective_trace;  // F(nu^(t)) = sum_n pi_n W2(nu^(t), mu_n)
  std::vector<double> weights_final;    // normalised IRLS weights of the last step
  Termination termination = Termination::max_iterations;
  int iterations = 0;
  std::optional<std::size_t> coincident_input;
};

/// Called after every weight update with the outer index and the normalised
/// weights that feed the next barycenter solve.
using IrlsObserver = std::function<void(int, std::span<const double>)>;

/// Wasserstein median by iteratively reweighted least squares: each step
/// solves a barycenter with weights pi_n / W2(nu, mu_n), renormalised.
/// A step is accepted only if it does not raise the weighted sum of squared
/// distances it was meant to minimise; otherwise the solve is refined and
/// repeated, and when that is exhausted the iteration stops as converged.
template <SpaceAdapter Adapter>
MedianResult<typename Adapter::Measure> irls_median(
    Adapter& adapter, const std::vector<typename Adapter::Measure>& inputs,
    const SimplexWeights& pis, const IrlsConfig& cfg,
    const std::optional<typename Adapter::Measure>& initial = std::nullopt,
    const IrlsObserver& observer = {}) {
  using M = typename Adapter::Measure;
  cfg.validate();
  if (inputs.empty()) throw InvalidInput("irls_median: no input measures");
  if (inputs.size() != pis.size())
    throw InvalidInput("irls_median: need one weight per input measure");
  const std::size_t count = inputs.size();

  if (count == 1) {
    return MedianResult<M>{inputs.front(), {0.0}, {1.0},
                           Termination::coincided_with_input, 0, 0};
  }

  double scale = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j)
      scale += adapter.distance(inputs[i], inputs[j]);
  scale /= static_cast<double>(count * (count - 1) / 2);
  if (scale == 0.0) {
    // Every input is the same measure.
    std::vector<double> weights(pis.values().begin(), pis.values().end());
    return MedianResult<M>{inputs.front(), {0.0}, std::move(weights),
                           Termination::coincided_with_input, 0, 0};
  }
  const double coincidence = cfg.coincidence_tol * scale;

  std::optional<M> nu;
  if (cfg.initializer == IrlsInit::given) {
    if (!initial) throw InvalidInput("irls_median: initializer=given without an initial measure");
    nu.emplace(*initial);
  } else {
    nu.emplace(adapter.barycenter(pis, inputs, nullptr));
  }

  std::vector<double> dist(count);
  auto evaluate = [&](const M& candidate, std::vector<double>& out) {
    double objective = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
      out[n] = adapter.distance(candidate, inputs[n]);
      objective += pis[n] * out[n];
    }
    return objective;
  };
  auto coincident = [&]() -> std::optional<std::size_t> {
    for (std::size_t n = 0; n < count; ++n)
      if (dist[n] <= coincidence) return n;
    return std::nullopt;
  };

  MedianResult<M> result{*nu, {evaluate(*nu, dist)}, {}, Termination::max_iterations, 0, {}};
  result.weights_final.assign(pis.values().begin(), pis.values().end());
  if (auto hit = coincident()) {
    result.termination = Termination::coincided_with_input;
    result.coincident_input = hit;
    return result;
  }

  std::vector<double> w(count);
  std::vector<double> next_dist(count);
  auto surrogate = [&](const std::vector<double>& d) {
    double s = 0.0;
    for (std::size_t n = 0; n < count; ++n) s += w[n] * d[n] * d[n];
    return s;
  };
  for (int t = 0; t < cfg.max_outer; ++t) {
    double total = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
      w[n] = pis[n] / dist[n];
      total += w[n];
    }
    for (double& v : w) v /= total;
    if (observer) observer(t, w);
    const SimplexWeights weights = SimplexWeights::normalized(w);

    M next = adapter.barycenter(weights, inputs, &*nu);
    double objective = evaluate(next, next_dist);
    bool stalled = false;
    while (surrogate(next_dist) > surrogate(dist)) {
      if constexpr (RefinableSpace<Adapter>) {
        if (adapter.refine()) {
          try {
            next = adapter.barycenter(weights, inputs, &*nu);
          } catch (const ConvergenceError&) {
            stalled = true;
            break;
          }
          objective = evaluate(next, next_dist);
          continue;
        }
      }
      stalled = true;
      break;
    }
    result.weights_final.assign(weights.values().begin(), weights.values().end());
    if (stalled) {
      // No progress is possible at the solver's precision.
      result.termination = Termination::converged;
      break;
    }
    const double change = adapter.discrepancy(*nu, next);
    result.objective_trace.push_back(objective);
    result.iterations = t + 1;
    dist.swap(next_dist);
    nu.emplace(std::move(next));

    if (auto hit = coincident()) {
      result.termination = Termination::coincided_with_input;
      result.coincident_input = hit;
      break;
    }
    if (change <= cfg.discrepancy_tol) {
      result.termination = Termination::converged;
      break;
    }
  }
  result.centroid = std::move(*nu);
  return result;
}

/// distance = w2_1d, barycenter = bary_1d, discrepancy = Euclidean norm of
/// the quantile-vector difference.
class QuantileSpace {
 public:
  using Measure = QuantileFunction;

  double distance(const Measure& a, const Measure& b) const { return w2_1d(a, b); }
  Measure barycenter(const SimplexWeights& w, const std::vector<Measure>& inputs,
                     const Measure*) const {
    return bary_1d(w, inputs);
  }
  double discrepancy(const Measure& a, const Measure& b) const;
};

/// distance = w2_gaussian, barycenter = bary_gaussian warm-started from the
/// current iterate, discrepancy = Frobenius norm.
class GaussianSpace {
 public:
  using Measure = SpdMatrix;

  explicit GaussianSpace(GaussianBarycenterConfig cfg = {}) : cfg_(cfg) {}

  double distance(const Measure& a, const Measure& b) const { return w2_gaussian(a, b); }
  Measure barycenter(const SimplexWeights& w, const std::vector<Measure>& inputs,
                     const Measure* previous) const {
    return previous == nullptr ? bary_gaussian(w, inputs, cfg_)
                               : bary_gaussian(w, inputs, cfg_, *previous);
  }
  double discrepancy(const Measure& a, const Measure& b) const {
    return (a.matrix() - b.matrix()).norm();
  }

 private:
  GaussianBarycenterConfig cfg_;
};

/// distance = debiased Sinkhorn divergence (sqrt), barycenter = debiased
/// Bregman projections, discrepancy = Euclidean norm of the mass difference.
/// Caches input self-transport values and warm-starts every solve.
class GridSpace {
 public:
  using Measure = GridMeasure;

  GridSpace(const GridMeasure& grid, SinkhornConfig sinkhorn, GridBarycenterConfig bary);

  double distance(const Measure& a, const Measure& b);
  Measure barycenter(const SimplexWeights& w, const std::vector<Measure>& inputs,
                     const Measure* previous);
  double discrepancy(const Measure& a, const Measure& b) const;
  /// Tightens the barycenter tolerance a hundredfold, down to 1e-12.
  bool refine();

 private:
  struct SelfEntry {
    std::vector<double> mass;
    std::vector<double> potential;
    double value = 0.0;
  };
  double self_value(const Measure& m);
  EntropicPotentials& pair_state(const Measure& a, const Measure& b);

  SinkhornSolver solver_;
  GridBarycenterConfig bary_cfg_;
  GridBarycenterState bary_state_;
  std::vector<SelfEntry> self_cache_;
  std::vector<std::pair<std::size_t, EntropicPotentials>> pair_cache_;
};

MedianResult<QuantileFunction> median_1d(const std::vector<QuantileFunction>& qs,
                                         const SimplexWeights& pis,
                                         const IrlsConfig& cfg = {});

MedianResult<SpdMatrix> median_gaussian(const std::vector<SpdMatrix>& sigmas,
                                        const SimplexWeights& pis,
                                        const IrlsConfig& cfg = {},
                                        const GaussianBarycenterConfig& bary_cfg = {});

MedianResult<GridMeasure> median_grid(const std::vector<GridMeasure>& ms,
                                      const SimplexWeights& pis,
                                      const IrlsConfig& cfg = {},
                                      const SinkhornConfig& sinkhorn_cfg = {},
                                      const GridBarycenterConfig& grid_cfg = {});

}  // namespace otmedian
