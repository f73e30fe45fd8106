#include "otmedian/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "otmedian/errors.hpp"

namespace otmedian {

SimplexWeights::SimplexWeights(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("simplex weights: empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidInput("simplex weights: entries must be finite and > 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw InvalidInput("simplex weights: entries sum to " +
                       std::to_string(sum) + ", expected 1");
}

SimplexWeights SimplexWeights::normalized(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("simplex weights: empty");
  double sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidInput("simplex weights: entries must be finite and > 0");
    sum += v;
  }
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v /= sum;
  return SimplexWeights(std::move(out));
}

SimplexWeights SimplexWeights::uniform(std::size_t n) {
  if (n == 0) throw InvalidInput("simplex weights: empty");
  return SimplexWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

QuantileFunction::QuantileFunction(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() < 2)
    throw InvalidInput("quantile function: grid size must be >= 2");
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j]))
      throw InvalidInput("quantile function: non-finite value at index " +
                         std::to_string(j));
    if (j > 0 && values_[j] < values_[j - 1])
      throw InvalidInput("quantile function: values decrease at index " +
                         std::to_string(j));
  }
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw InvalidInput("spd matrix: must be square and non-empty");
  if (!m.allFinite()) throw InvalidInput("spd matrix: non-finite entry");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double scale = std::max(1.0, std::abs(m(i, j)));
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
        throw InvalidInput("spd matrix: not symmetric");
    }
  }
  m_ = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m_, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 0.0))
    throw InvalidInput("spd matrix: not positive definite");
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

GridMeasure::GridMeasure(std::vector<std::size_t> shape,
                         std::vector<std::vector<double>> axes,
                         std::vector<double> mass)
    : shape_(std::move(shape)), axes_(std::move(axes)), mass_(std::move(mass)) {
  if (shape_.empty() || shape_.size() > 2)
    throw InvalidInput("grid measure: rank must be 1 or 2");
  if (axes_.size() != shape_.size())
    throw InvalidInput("grid measure: one coordinate axis per dimension");
  std::size_t total = 1;
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (shape_[a] == 0) throw InvalidInput("grid measure: empty axis");
    if (axes_[a].size() != shape_[a])
      throw InvalidInput("grid measure: axis length does not match shape");
    const auto& ax = axes_[a];
    if (ax.size() >= 2) {
      const double h = ax[1] - ax[0];
      if (!(h > 0.0))
        throw InvalidInput("grid measure: coordinates must increase");
      for (std::size_t i = 1; i < ax.size(); ++i) {
        if (std::abs((ax[i] - ax[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
          throw InvalidInput("grid measure: coordinate spacing is not uniform");
      }
    }
    total *= shape_[a];
  }
  if (mass_.size() != total)
    throw InvalidInput("grid measure: mass length does not match shape");
  double sum = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw InvalidInput("grid measure: mass entries must be finite and >= 0");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw InvalidInput("grid measure: mass sums to " + std::to_string(sum) +
                       ", expected 1");
}

std::vector<double> GridMeasure::unit_midpoints(std::size_t n) {
  std::vector<double> ax(n);
  for (std::size_t i = 0; i < n; ++i)
    ax[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return ax;
}

GridMeasure GridMeasure::on_unit_grid(std::vector<std::size_t> shape,
                                      std::vector<double> mass) {
  std::vector<std::vector<double>> axes;
  for (std::size_t n : shape) axes.push_back(unit_midpoints(n));
  return GridMeasure(std::move(shape), std::move(axes), std::move(mass));
}

std::vector<double> GridMeasure::point(std::size_t i) const {
  if (rank() == 1) return {axes_[0][i]};
  const std::size_t cols = shape_[1];
  return {axes_[0][i / cols], axes_[1][i % cols]};
}

bool GridMeasure::same_grid(const GridMeasure& other) const {
  return shape_ == other.shape_ && axes_ == other.axes_;
}

QuantileFunction quantile_from_sample(std::span<const double> sample,
                                      std::size_t grid_size) {
  if (sample.empty()) throw InvalidInput("quantile_from_sample: empty sample");
  if (grid_size < 2)
    throw InvalidInput("quantile_from_sample: grid size must be >= 2");
  std::vector<double> sorted(sample.begin(), sample.end());
  for (double x : sorted)
    if (!std::isfinite(x))
      throw InvalidInput("quantile_from_sample: non-finite sample value");
  std::sort(sorted.begin(), sorted.end());

  const double n = static_cast<double>(sorted.size());
  const double last = n - 1.0;
  std::vector<double> values(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    // Order statistic i sits at probability (i + 1/2)/n.
    const double pos =
        std::clamp(QuantileFunction::grid_point(j, grid_size) * n - 0.5, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= sorted.size()) {
      values[j] = sorted[lo];
    } else {
      values[j] = sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    }
  }
  // Interpolation is monotone in exact arithmetic; guard against rounding.
  for (std::size_t j = 1; j < grid_size; ++j)
    values[j] = std::max(values[j], values[j - 1]);
  return QuantileFunction(std::move(values));
}

GridMeasure histogram_from_sample(std::span<const double> sample,
                                  std::size_t bins) {
  if (bins == 0) throw InvalidInput("histogram_from_sample: bins must be >= 1");
  if (sample.empty()) throw InvalidInput("histogram_from_sample: empty sample");
  std::vector<double> counts(bins, 0.0);
  for (double x : sample) {
    if (!(x >= 0.0 && x <= 1.0))
      throw InvalidInput("histogram_from_sample: value outside [0,1]");
    auto b = static_cast<std::size_t>(x * static_cast<double>(bins));
    counts[std::min(b, bins - 1)] += 1.0;
  }
  const double total = static_cast<double>(sample.size());
  for (double& c : counts) c /= total;
  return GridMeasure::on_unit_grid({bins}, std::move(counts));
}

GridMeasure normalize_image(const std::vector<std::vector<double>>& pixels) {
  if (pixels.empty() || pixels.front().empty())
    throw InvalidInput("normalize_image: empty image");
  const std::size_t rows = pixels.size();
  const std::size_t cols = pixels.front().size();
  std::vector<double> mass;
  mass.reserve(rows * cols);
  double sum = 0.0;
  for (const auto& row : pixels) {
    if (row.size() != cols) throw InvalidInput("normalize_image: ragged rows");
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw InvalidInput("normalize_image: pixels must be finite and >= 0");
      mass.push_back(p);
      sum += p;
    }
  }
  if (!(sum > 0.0)) throw InvalidInput("normalize_image: all-zero image");
  for (double& m : mass) m /= sum;
  return GridMeasure::on_unit_grid({rows, cols}, std::move(mass));
}

}  // namespace otmedian
