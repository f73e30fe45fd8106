#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace otmedian {

/// Strictly positive weights summing to one.
class SimplexWeights {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Validates `values` as given; throws InvalidInput on violation.
  explicit SimplexWeights(std::vector<double> values);

  /// Rescales strictly positive `values` so they sum to one.
  static SimplexWeights normalized(std::span<const double> values);
  static SimplexWeights uniform(std::size_t n);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// A probability measure on the real line, stored as its quantile function
/// sampled on the mid-quantile grid t_j = (j - 1/2) / K, j = 1..K.
class QuantileFunction {
 public:
  explicit QuantileFunction(std::vector<double> values);

  std::size_t grid_size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }

  /// Grid abscissa t_j for zero-based index j.
  static double grid_point(std::size_t j, std::size_t grid_size) {
    return (static_cast<double>(j) + 0.5) / static_cast<double>(grid_size);
  }

 private:
  std::vector<double> values_;
};

/// Covariance of a non-degenerate centered Gaussian measure.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& m);

  static SpdMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

 private:
  Eigen::MatrixXd m_;
};

/// Discrete probability measure on a regular 1D or 2D grid. Mass is stored
/// row-major (the last axis varies fastest).
class GridMeasure {
 public:
  GridMeasure(std::vector<std::size_t> shape,
              std::vector<std::vector<double>> axes, std::vector<double> mass);

  /// Grid of bin midpoints on [0,1] along every axis.
  static GridMeasure on_unit_grid(std::vector<std::size_t> shape,
                                  std::vector<double> mass);
  static std::vector<double> unit_midpoints(std::size_t n);

  std::size_t rank() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
  std::span<const double> mass() const noexcept { return mass_; }
  std::size_t size() const noexcept { return mass_.size(); }

  /// Support coordinates of flat bin `i`, one entry per axis.
  std::vector<double> point(std::size_t i) const;

  /// True when both measures live on the same grid (shape and coordinates).
  bool same_grid(const GridMeasure& other) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::vector<double>> axes_;
  std::vector<double> mass_;
};

/// Empirical quantile function on the mid-quantile grid. Linear interpolation
/// between order statistics placed at (i + 1/2)/n, constant beyond the ends.
QuantileFunction quantile_from_sample(std::span<const double> sample,
                                      std::size_t grid_size);

/// Relative-frequency histogram over `bins` equal bins of [0,1].
GridMeasure histogram_from_sample(std::span<const double> sample,
                                  std::size_t bins);

/// L1-normalised image on the unit-square midpoint grid. `pixels` is
/// indexed [row][col].
GridMeasure normalize_image(const std::vector<std::vector<double>>& pixels);

}  // namespace otmedian
