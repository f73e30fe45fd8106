#include "otmedian/median.hpp"

#include <algorithm>
#include <cmath>

namespace otmedian {

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::coincided_with_input: return "coincided_with_input";
    case Termination::max_iterations: return "max_iterations";
  }
  return "unknown";
}

double QuantileSpace::discrepancy(const Measure& a, const Measure& b) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.grid_size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return std::sqrt(acc);
}

GridSpace::GridSpace(const GridMeasure& grid, SinkhornConfig sinkhorn,
                     GridBarycenterConfig bary)
    : solver_(grid, sinkhorn), bary_cfg_(bary) {
  bary_cfg_.validate();
}

double GridSpace::self_value(const Measure& m) {
  for (const auto& e : self_cache_)
    if (std::equal(e.mass.begin(), e.mass.end(), m.mass().begin(), m.mass().end()))
      return e.value;
  SelfEntry entry;
  entry.mass.assign(m.mass().begin(), m.mass().end());
  if (!self_cache_.empty()) entry.potential = self_cache_.back().potential;
  entry.value = solver_.solve_self(m.mass(), entry.potential).value;
  self_cache_.push_back(std::move(entry));
  return self_cache_.back().value;
}

EntropicPotentials& GridSpace::pair_state(const Measure&, const Measure& b) {
  std::size_t key = self_cache_.size();
  for (std::size_t i = 0; i < self_cache_.size(); ++i) {
    const auto& e = self_cache_[i];
    if (std::equal(e.mass.begin(), e.mass.end(), b.mass().begin(), b.mass().end())) {
      key = i;
      break;
    }
  }
  for (auto& [k, state] : pair_cache_)
    if (k == key) return state;
  pair_cache_.emplace_back(key, EntropicPotentials{});
  return pair_cache_.back().second;
}

double GridSpace::distance(const Measure& a, const Measure& b) {
  if (!a.same_grid(b)) throw InvalidInput("grid distance: measures live on different grids");
  const double self_a = self_value(a);
  const double self_b = self_value(b);
  const double value =
      solver_.divergence(a.mass(), b.mass(), self_a, self_b, pair_state(a, b));
  return std::sqrt(std::max(0.0, value));
}

GridMeasure GridSpace::barycenter(const SimplexWeights& w,
                                  const std::vector<Measure>& inputs,
                                  const Measure*) {
  return bary_grid(w, inputs, bary_cfg_, &bary_state_);
}

bool GridSpace::refine() {
  if (bary_cfg_.tol <= 1e-12) return false;
  bary_cfg_.tol = std::max(bary_cfg_.tol * 1e-2, 1e-12);
  return true;
}

double GridSpace::discrepancy(const Measure& a, const Measure& b) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.mass()[i] - b.mass()[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

MedianResult<QuantileFunction> median_1d(const std::vector<QuantileFunction>& qs,
                                         const SimplexWeights& pis,
                                         const IrlsConfig& cfg) {
  QuantileSpace space;
  return irls_median(space, qs, pis, cfg);
}

MedianResult<SpdMatrix> median_gaussian(const std::vector<SpdMatrix>& sigmas,
                                        const SimplexWeights& pis,
                                        const IrlsConfig& cfg,
                                        const GaussianBarycenterConfig& bary_cfg) {
  GaussianSpace space(bary_cfg);
  return irls_median(space, sigmas, pis, cfg);
}

MedianResult<GridMeasure> median_grid(const std::vector<GridMeasure>& ms,
                                      const SimplexWeights& pis,
                                      const IrlsConfig& cfg,
                                      const SinkhornConfig& sinkhorn_cfg,
                                      const GridBarycenterConfig& grid_cfg) {
  if (ms.empty()) throw InvalidInput("median_grid: no input measures");
  GridSpace space(ms.front(), sinkhorn_cfg, grid_cfg);
  return irls_median(space, ms, pis, cfg);
}

}  // namespace otmedian
