// Random fixtures shared by the test binaries.
#pragma once

#include <algorithm>
#include <vector>

#include "otmedian/measures.hpp"
#include "otmedian/random.hpp"

namespace testutil {

/// SPD matrix with eigenvalues in [0.2, 3] and a random orientation.
inline otmedian::SpdMatrix random_spd(otmedian::Rng& rng, int d, double lo = 0.2, double hi = 3.0) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev(i) = lo + (hi - lo) * rng.uniform();
  const Eigen::MatrixXd s = q * ev.asDiagonal() * q.transpose();
  return otmedian::SpdMatrix(0.5 * (s + s.transpose()));
}

/// Quantiles of location-scale draws mixed with a random monotone bump.
inline otmedian::QuantileFunction random_quantiles(otmedian::Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  double x = 3.0 * rng.normal();
  for (double& q : v) {
    x += 0.5 * rng.uniform() * rng.uniform();
    q = x;
  }
  return otmedian::QuantileFunction(std::move(v));
}

/// Random grid measure; each bin is empty with probability `zero_prob`.
inline otmedian::GridMeasure random_grid(otmedian::Rng& rng, std::vector<std::size_t> shape,
                                         double zero_prob = 0.0) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  std::vector<double> m(n);
  double total = 0;
  for (double& v : m) {
    v = rng.uniform() < zero_prob ? 0.0 : 0.05 + rng.uniform();
    total += v;
  }
  if (total == 0) {
    m[0] = 1.0;
    total = 1.0;
  }
  for (double& v : m) v /= total;
  return otmedian::GridMeasure::on_unit_grid(std::move(shape), std::move(m));
}

}  // namespace testutil
