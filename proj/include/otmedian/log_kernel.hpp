#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otmedian/measures.hpp"

namespace otmedian {

/// Squared-Euclidean cost on a regular grid, applied through the Gibbs
/// kernel in the log domain:
///
///   out_i = log sum_j exp(logv_j - C_ij / eps)
///
/// The cost separates per axis, so on an r x c grid one application costs
/// O(r c (r + c)) instead of O((r c)^2).
class GridCost {
 public:
  explicit GridCost(const GridMeasure& grid);

  std::size_t size() const noexcept { return size_; }
  double max_cost() const noexcept { return max_cost_; }
  double cost(std::size_t i, std::size_t j) const;

  /// One-off application; prefer GibbsKernel when eps is reused.
  void log_apply(std::span<const double> logv, double eps,
                 std::span<double> out) const;

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  const std::vector<double>& axis_cost(std::size_t axis) const { return axis_cost_[axis]; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::vector<double>> axis_cost_;  // per axis, n x n row-major
  std::size_t size_ = 0;
  double max_cost_ = 0.0;
};

/// The per-axis kernels exp(-C / eps) for one epsilon. Each line of the grid
/// is shifted by its maximum, contracted with the kernel by a matrix product
/// and mapped back with a log; outputs whose sum falls into the underflow
/// range are recomputed term by term in the log domain.
class GibbsKernel {
 public:
  GibbsKernel(const GridCost& cost, double eps);

  double epsilon() const noexcept { return eps_; }

  void log_apply(std::span<const double> logv, std::span<double> out) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::vector<double>> cost_;    // per axis, n x n row-major
  double eps_;
  std::vector<std::vector<double>> kernel_;  // per axis, n x n row-major
};

/// Numerically stable log(sum(exp(x))); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

}  // namespace otmedian
