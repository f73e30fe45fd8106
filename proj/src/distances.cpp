#include "otmedian/distances.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otmedian/errors.hpp"

namespace otmedian {

double w2_1d(const QuantileFunction& a, const QuantileFunction& b) {
  if (a.grid_size() != b.grid_size())
    throw InvalidInput("w2_1d: quantile grids differ (" +
                       std::to_string(a.grid_size()) + " vs " +
                       std::to_string(b.grid_size()) + ")");
  double acc = 0.0;
  for (std::size_t j = 0; j < a.grid_size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.grid_size()));
}

namespace {

// Square root of a symmetric positive semi-definite matrix; tiny negative
// eigenvalues from rounding are set to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

SpdMatrix spd_sqrt(const SpdMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.matrix());
  if (eig.info() != Eigen::Success)
    throw InvalidInput("spd_sqrt: eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double largest = ev(ev.size() - 1);
  if (!(largest > 0.0) || ev(0) < 1e-12 * largest)
    throw InvalidInput("spd_sqrt: matrix is numerically singular");
  const Eigen::MatrixXd root =
      eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  return SpdMatrix(0.5 * (root + root.transpose()));
}

double w2_gaussian_squared(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
  if (s1.rows() != s2.rows())
    throw InvalidInput("w2_gaussian: dimension mismatch (" +
                       std::to_string(s1.rows()) + " vs " +
                       std::to_string(s2.rows()) + ")");
  const Eigen::MatrixXd r1 = psd_sqrt(s1);
  const Eigen::MatrixXd cross = psd_sqrt(r1 * s2 * r1);
  const double trace_form = s1.trace() + s2.trace() - 2.0 * cross.trace();

  // The trace form cancels catastrophically when s1 ~ s2. There we switch to
  // ||(T - I) s1^{1/2}||_F^2 with the optimal map T = r1^{-1} cross r1^{-1},
  // which has the same value but no cancellation.
  const double scale = s1.trace() + s2.trace();
  if (trace_form > 1e-6 * scale) return trace_form;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s1);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(ev.size() - 1))) return std::max(trace_form, 0.0);
  const Eigen::MatrixXd inv_root = eig.eigenvectors() *
                                   ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                                   eig.eigenvectors().transpose();
  const Eigen::MatrixXd r1_squared = r1 * r1;
  const Eigen::MatrixXd map_minus_id =
      inv_root * (cross - r1_squared) * inv_root;
  return (map_minus_id * r1).squaredNorm();
}

double w2_gaussian(const SpdMatrix& s1, const SpdMatrix& s2) {
  return std::sqrt(std::max(0.0, w2_gaussian_squared(s1.matrix(), s2.matrix())));
}

void SinkhornConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidInput("sinkhorn: epsilon must be > 0");
  if (!(tol > 0.0)) throw InvalidInput("sinkhorn: tol must be > 0");
  if (max_iter < 1) throw InvalidInput("sinkhorn: max_iter must be >= 1");
}

double max_squared_distance(const GridMeasure& grid) {
  double total = 0.0;
  for (const auto& ax : grid.axes()) {
    const double span = ax.back() - ax.front();
    total += span * span;
  }
  return total;
}

}  // namespace otmedian
