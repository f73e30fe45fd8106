#pragma once

#include <span>
#include <vector>

#include "otmedian/distances.hpp"
#include "otmedian/log_kernel.hpp"

namespace otmedian {

/// Dual potentials of an entropic transport problem; the plan is
/// P_ij = a_i b_j exp((f_i + g_j - C_ij) / eps).
struct EntropicPotentials {
  std::vector<double> f;
  std::vector<double> g;
};

struct EntropicSolve {
  double value = 0.0;      // <a, f> + <b, g>
  double violation = 0.0;  // final L-infinity marginal violation
  int iterations = 0;
};

/// Log-domain Sinkhorn on a fixed grid. Stateless apart from the cost; warm
/// starts are carried by the caller through the potentials argument.
class SinkhornSolver {
 public:
  SinkhornSolver(const GridMeasure& grid, SinkhornConfig cfg);

  const GridCost& cost() const noexcept { return cost_; }
  const SinkhornConfig& config() const noexcept { return cfg_; }

  /// Entropic OT between two mass vectors on the grid. Empty potentials
  /// trigger a cold start with epsilon annealing.
  EntropicSolve solve(std::span<const double> a, std::span<const double> b,
                      EntropicPotentials& state) const;

  /// Entropic OT of a measure with itself via the symmetric iteration.
  EntropicSolve solve_self(std::span<const double> a,
                           std::vector<double>& potential) const;

  /// OT(a,b) - OT(a,a)/2 - OT(b,b)/2 given the two self values.
  double divergence(std::span<const double> a, std::span<const double> b,
                    double self_a, double self_b,
                    EntropicPotentials& state) const;

 private:
  GridCost cost_;
  SinkhornConfig cfg_;
  GibbsKernel kernel_;
};

}  // namespace otmedian
