#include "otmedian/random.hpp"

#include <cmath>

#include "otmedian/errors.hpp"

namespace otmedian {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double sample_gamma_one(double shape, double scale, Rng& rng) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw InvalidInput("sample_gamma: shape and scale must be > 0");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double boost = std::pow(rng.uniform(), 1.0 / shape);
    return sample_gamma_one(shape + 1.0, scale, rng) * boost;
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

std::vector<double> sample_gamma(double shape, double scale, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (double& x : out) x = sample_gamma_one(shape, scale, rng);
  return out;
}

std::vector<double> sample_beta(double alpha, double beta, std::size_t n, Rng& rng) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw InvalidInput("sample_beta: parameters must be > 0");
  std::vector<double> out(n);
  for (double& x : out) {
    const double g1 = sample_gamma_one(alpha, 1.0, rng);
    const double g2 = sample_gamma_one(beta, 1.0, rng);
    x = g1 / (g1 + g2);
  }
  return out;
}

SpdMatrix sample_gaussian_cov(const SpdMatrix& sigma, std::size_t n, Rng& rng) {
  if (n < 2) throw InvalidInput("sample_gaussian_cov: need n >= 2");
  const Eigen::Index d = sigma.dim();
  const Eigen::MatrixXd chol = sigma.matrix().llt().matrixL();
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::MatrixXd draws(d, static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < draws.cols(); ++c) {
      Eigen::VectorXd z(d);
      for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
      draws.col(c) = chol * z;
    }
    const Eigen::VectorXd mean = draws.rowwise().mean();
    draws.colwise() -= mean;
    Eigen::MatrixXd cov = draws * draws.transpose() / static_cast<double>(n);
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    if (ev(0) > 1e-12 * ev(ev.size() - 1)) return SpdMatrix(cov);
  }
  throw InvalidInput("sample_gaussian_cov: sample covariance is singular");
}

}  // namespace otmedian
