#include "otmedian/barycenter.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "otmedian/errors.hpp"
#include "otmedian/log_kernel.hpp"

namespace otmedian {

QuantileFunction bary_1d(const SimplexWeights& weights,
                         const std::vector<QuantileFunction>& qs) {
  if (qs.empty() || qs.size() != weights.size())
    throw InvalidInput("bary_1d: need one weight per quantile function");
  const std::size_t k = qs.front().grid_size();
  for (const auto& q : qs)
    if (q.grid_size() != k) throw InvalidInput("bary_1d: quantile grids differ");
  std::vector<double> out(k, 0.0);
  for (std::size_t n = 0; n < qs.size(); ++n)
    for (std::size_t j = 0; j < k; ++j) out[j] += weights[n] * qs[n][j];
  return QuantileFunction(std::move(out));
}

void GaussianBarycenterConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidInput("bary_gaussian: tol must be > 0");
  if (max_iter < 1) throw InvalidInput("bary_gaussian: max_iter must be >= 1");
}

namespace {

struct SymmetricRoots {
  Eigen::MatrixXd root;
  Eigen::MatrixXd inv_root;
};

SymmetricRoots symmetric_roots(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(ev.size() - 1)))
    throw InvalidInput("bary_gaussian: iterate lost positive definiteness");
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return {q * ev.cwiseSqrt().asDiagonal() * q.transpose(),
          q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose()};
}

Eigen::MatrixXd psd_root(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  const Eigen::VectorXd r = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * r.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// sum_n l_n (S^1/2 S_n S^1/2)^1/2
Eigen::MatrixXd weighted_root_sum(const SimplexWeights& weights,
                                  const std::vector<SpdMatrix>& sigmas,
                                  const Eigen::MatrixXd& root) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(root.rows(), root.cols());
  for (std::size_t n = 0; n < sigmas.size(); ++n)
    acc += weights[n] * psd_root(root * sigmas[n].matrix() * root);
  return symmetrize(acc);
}

double frechet_value(const SimplexWeights& weights,
                     const std::vector<SpdMatrix>& sigmas,
                     const Eigen::MatrixXd& s) {
  double acc = 0.0;
  for (std::size_t n = 0; n < sigmas.size(); ++n)
    acc += weights[n] * w2_gaussian_squared(s, sigmas[n].matrix());
  return acc;
}

}  // namespace

GaussianBarycenterReport bary_gaussian_report(
    const SimplexWeights& weights, const std::vector<SpdMatrix>& sigmas,
    const GaussianBarycenterConfig& cfg, const Eigen::MatrixXd* initial,
    bool record_frechet) {
  cfg.validate();
  if (sigmas.empty() || sigmas.size() != weights.size())
    throw InvalidInput("bary_gaussian: need one weight per covariance");
  const Eigen::Index d = sigmas.front().dim();
  for (const auto& s : sigmas)
    if (s.dim() != d) throw InvalidInput("bary_gaussian: dimension mismatch");

  GaussianBarycenterReport report;
  Eigen::MatrixXd s;
  if (initial != nullptr) {
    if (initial->rows() != d) throw InvalidInput("bary_gaussian: initial has wrong dimension");
    s = *initial;
  } else {
    s = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t n = 0; n < sigmas.size(); ++n) s += weights[n] * sigmas[n].matrix();
  }
  if (record_frechet) report.frechet_trace.push_back(frechet_value(weights, sigmas, s));

  double step = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.max_iter; ++k) {
    const SymmetricRoots roots = symmetric_roots(s);
    const Eigen::MatrixXd m = weighted_root_sum(weights, sigmas, roots.root);
    Eigen::MatrixXd next;
    if (cfg.rule == GaussianBarycenterRule::ruschendorf) {
      next = m;
    } else {
      next = symmetrize(roots.inv_root * m * m * roots.inv_root);
    }
    step = (next - s).norm();
    s = std::move(next);
    report.iterations = k + 1;
    if (record_frechet) report.frechet_trace.push_back(frechet_value(weights, sigmas, s));
    if (step <= cfg.tol) break;
  }
  if (!(step <= cfg.tol))
    throw ConvergenceError("bary_gaussian: no convergence within " +
                               std::to_string(cfg.max_iter) + " iterations",
                           step);
  const SymmetricRoots roots = symmetric_roots(s);
  report.residual =
      (weighted_root_sum(weights, sigmas, roots.root) - s).norm() / s.norm();
  report.matrix = std::move(s);
  return report;
}

SpdMatrix bary_gaussian(const SimplexWeights& weights,
                        const std::vector<SpdMatrix>& sigmas,
                        const GaussianBarycenterConfig& cfg,
                        const std::optional<SpdMatrix>& initial) {
  const Eigen::MatrixXd* init = initial ? &initial->matrix() : nullptr;
  return SpdMatrix(bary_gaussian_report(weights, sigmas, cfg, init, false).matrix);
}

void GridBarycenterConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidInput("bary_grid: epsilon must be > 0");
  if (!(tol > 0.0)) throw InvalidInput("bary_grid: tol must be > 0");
  if (inner_iter < 1) throw InvalidInput("bary_grid: inner_iter must be >= 1");
}

GridMeasure bary_grid(const SimplexWeights& weights,
                      const std::vector<GridMeasure>& ms,
                      const GridBarycenterConfig& cfg, GridBarycenterState* state) {
  cfg.validate();
  if (ms.empty() || ms.size() != weights.size())
    throw InvalidInput("bary_grid: need one weight per measure");
  for (const auto& m : ms)
    if (!m.same_grid(ms.front()))
      throw InvalidInput("bary_grid: measures live on different grids");

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const GridCost cost(ms.front());
  const GibbsKernel kernel(cost, cfg.epsilon);
  const std::size_t size = cost.size();
  const std::size_t count = ms.size();

  std::vector<std::vector<double>> log_alpha(count, std::vector<double>(size));
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t i = 0; i < size; ++i) {
      const double a = ms[k].mass()[i];
      log_alpha[k][i] = a > 0.0 ? std::log(a) : kNegInf;
    }

  GridBarycenterState local;
  GridBarycenterState& st = state != nullptr ? *state : local;
  if (st.log_b.size() != count || st.log_d.size() != size) {
    st.log_b.assign(count, std::vector<double>(size, 0.0));
    st.log_d.assign(size, 0.0);
  }

  // Scaling form (Gibbs kernel K):
  //   a_k = alpha_k / K b_k,  beta = d * prod_k (K a_k)^w_k,
  //   b_k = beta / K a_k,     d = sqrt(d * beta / K d).
  // The d update removes the entropic blur of the plain Bregman iteration.
  std::vector<std::vector<double>> log_ka(count, std::vector<double>(size));
  std::vector<double> log_a(size), tmp(size), log_beta(size), prev(size, 0.0);
  double change = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < cfg.inner_iter; ++it) {
    for (std::size_t k = 0; k < count; ++k) {
      kernel.log_apply(st.log_b[k], tmp);
      for (std::size_t i = 0; i < size; ++i)
        log_a[i] = log_alpha[k][i] == kNegInf ? kNegInf : log_alpha[k][i] - tmp[i];
      kernel.log_apply(log_a, log_ka[k]);
    }
    for (std::size_t i = 0; i < size; ++i) {
      double acc = st.log_d[i];
      for (std::size_t k = 0; k < count; ++k) acc += weights[k] * log_ka[k][i];
      log_beta[i] = acc;
    }
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t i = 0; i < size; ++i) st.log_b[k][i] = log_beta[i] - log_ka[k][i];
    kernel.log_apply(st.log_d, tmp);
    for (std::size_t i = 0; i < size; ++i)
      st.log_d[i] = 0.5 * (st.log_d[i] + log_beta[i] - tmp[i]);

    const double last = change;
    change = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      const double b = std::exp(log_beta[i]);
      change += std::abs(b - prev[i]);
      prev[i] = b;
    }
    if (it == 0 || !(change <= cfg.tol)) continue;
    // Also bound the remaining distance to the fixed point, estimated from the
    // observed contraction; slow leaks into empty bins otherwise stop early.
    // A non-decreasing change below tol means rounding noise has taken over.
    const double rate = change / last;
    if (change == 0.0 || rate >= 1.0 || change * rate / (1.0 - rate) <= cfg.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("bary_grid: no convergence within " +
                               std::to_string(cfg.inner_iter) + " iterations",
                           change);
  double total = 0.0;
  for (double b : prev) total += b;
  for (double& b : prev) b /= total;
  return GridMeasure(ms.front().shape(), ms.front().axes(), std::move(prev));
}

}  // namespace otmedian
