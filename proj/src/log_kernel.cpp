#include "otmedian/log_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace otmedian {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Below this a kernel sum may have lost digits to subnormal products.
constexpr double kTinySum = 1e-280;

// Exact value of one output: LSE_j(v[j * stride] - cost[i*n + j] * inv_eps).
double exact_entry(const double* v, std::size_t stride, std::size_t n,
                   const double* cost_row, double inv_eps) {
  double mx = kNegInf;
  for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, v[j * stride] - cost_row[j] * inv_eps);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += std::exp(v[j * stride] - cost_row[j] * inv_eps - mx);
  return mx + std::log(s);
}

// Contracts the last axis of the lines x lines_len block `v` (line l holds
// v[l * n .. l * n + n)) with kernel k and writes line-wise results to out.
void contract_rows(const double* v, std::size_t lines, std::size_t n, const double* kernel,
                   const double* cost, double inv_eps, double* out) {
  RowMatrix w(static_cast<Eigen::Index>(lines), static_cast<Eigen::Index>(n));
  std::vector<double> shift(lines);
  for (std::size_t l = 0; l < lines; ++l) {
    const double* line = v + l * n;
    double mx = kNegInf;
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, line[j]);
    shift[l] = mx;
    for (std::size_t j = 0; j < n; ++j)
      w(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) =
          mx == kNegInf ? 0.0 : std::exp(line[j] - mx);
  }
  const Eigen::Map<const RowMatrix> k(kernel, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const RowMatrix sums = w * k.transpose();
  for (std::size_t l = 0; l < lines; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = sums(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i));
      double& o = out[l * n + i];
      if (shift[l] == kNegInf)
        o = kNegInf;
      else if (s >= kTinySum)
        o = shift[l] + std::log(s);
      else
        o = exact_entry(v + l * n, 1, n, cost + i * n, inv_eps);
    }
  }
}

// Same along the leading axis of a rows x cols block.
void contract_columns(const double* v, std::size_t rows, std::size_t cols, const double* kernel,
                      const double* cost, double inv_eps, double* out) {
  RowMatrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<double> shift(cols, kNegInf);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) shift[c] = std::max(shift[c], v[r * cols + c]);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          shift[c] == kNegInf ? 0.0 : std::exp(v[r * cols + c] - shift[c]);
  const Eigen::Map<const RowMatrix> k(kernel, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  const RowMatrix sums = k * w;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < cols; ++c) {
      const double s = sums(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      double& o = out[i * cols + c];
      if (shift[c] == kNegInf)
        o = kNegInf;
      else if (s >= kTinySum)
        o = shift[c] + std::log(s);
      else
        o = exact_entry(v + c, cols, rows, cost + i * rows, inv_eps);
    }
}

}  // namespace

GibbsKernel::GibbsKernel(const GridCost& cost, double eps) : shape_(cost.shape()), eps_(eps) {
  for (std::size_t axis = 0; axis < shape_.size(); ++axis) {
    cost_.push_back(cost.axis_cost(axis));
    std::vector<double> k(cost_.back());
    for (double& x : k) x = std::exp(-x / eps);
    kernel_.push_back(std::move(k));
  }
}

void GibbsKernel::log_apply(std::span<const double> logv, std::span<double> out) const {
  const double inv_eps = 1.0 / eps_;
  const auto& shape = shape_;
  if (shape.size() == 1) {
    contract_rows(logv.data(), 1, shape[0], kernel_[0].data(), cost_[0].data(),
                  inv_eps, out.data());
    return;
  }
  const std::size_t rows = shape[0];
  const std::size_t cols = shape[1];
  std::vector<double> scratch(rows * cols);
  contract_rows(logv.data(), rows, cols, kernel_[1].data(), cost_[1].data(), inv_eps,
                scratch.data());
  contract_columns(scratch.data(), rows, cols, kernel_[0].data(), cost_[0].data(),
                   inv_eps, out.data());
}

double log_sum_exp(std::span<const double> x) {
  double mx = kNegInf;
  for (double v : x) mx = std::max(mx, v);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

GridCost::GridCost(const GridMeasure& grid) : shape_(grid.shape()) {
  size_ = grid.size();
  for (const auto& ax : grid.axes()) {
    const std::size_t n = ax.size();
    std::vector<double> c(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = ax[i] - ax[j];
        c[i * n + j] = d * d;
      }
    axis_cost_.push_back(std::move(c));
    const double span = ax.back() - ax.front();
    max_cost_ += span * span;
  }
}

double GridCost::cost(std::size_t i, std::size_t j) const {
  if (shape_.size() == 1) return axis_cost_[0][i * shape_[0] + j];
  const std::size_t cols = shape_[1];
  return axis_cost_[0][(i / cols) * shape_[0] + (j / cols)] +
         axis_cost_[1][(i % cols) * cols + (j % cols)];
}

void GridCost::log_apply(std::span<const double> logv, double eps,
                         std::span<double> out) const {
  GibbsKernel(*this, eps).log_apply(logv, out);
}

}  // namespace otmedian
