#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otmedian/measures.hpp"

namespace otmedian {

/// W2 between two 1D measures: the L2(0,1) norm of the quantile difference,
/// approximated by the mid-point rule on the shared grid.
double w2_1d(const QuantileFunction& a, const QuantileFunction& b);

/// Principal square root via symmetric eigendecomposition. Eigenvalues below
/// 1e-12 times the largest are rejected rather than clamped.
SpdMatrix spd_sqrt(const SpdMatrix& s);

/// Bures-Wasserstein distance between N(0, s1) and N(0, s2).
double w2_gaussian(const SpdMatrix& s1, const SpdMatrix& s2);

/// Squared Bures-Wasserstein distance on raw matrices (no SPD validation).
/// Used inside iterative solvers where the inputs are SPD by construction.
double w2_gaussian_squared(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2);

struct SinkhornConfig {
  double epsilon = 1e-3;  // squared support units
  int max_iter = 100000;
  double tol = 1e-7;      // L-infinity marginal violation
  bool debiased = true;

  void validate() const;
};

/// Entropic OT (or its debiased Sinkhorn divergence when cfg.debiased),
/// reported as the square root of the clamped value so it approximates W2.
double sinkhorn_distance(const GridMeasure& a, const GridMeasure& b,
                         const SinkhornConfig& cfg);

/// Exact W2 between two grid measures by solving the transportation LP.
/// Both grids may hold at most kExactLpMaxBins bins.
inline constexpr std::size_t kExactLpMaxBins = 64;
double exact_lp_w2(const GridMeasure& a, const GridMeasure& b);

/// Optimal cost of the transportation problem min <P, cost> subject to
/// P 1 = supply, P^T 1 = demand, P >= 0. `cost` is row-major
/// supply.size() x demand.size(). Supplies and demands must have equal totals.
double transport_simplex(std::span<const double> supply,
                         std::span<const double> demand,
                         std::span<const double> cost);

/// Largest squared distance between two bins of the grid.
double max_squared_distance(const GridMeasure& grid);

}  // namespace otmedian
