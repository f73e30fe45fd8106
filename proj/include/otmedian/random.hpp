#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "otmedian/measures.hpp"

namespace otmedian {

/// Seedable generator with portable uniform and normal variates. The engine
/// output is fixed by the standard, and every conversion here is our own, so
/// streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a base seed and a tuple of stream ids.
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

  std::uint64_t next() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

double sample_gamma_one(double shape, double scale, Rng& rng);
std::vector<double> sample_gamma(double shape, double scale, std::size_t n, Rng& rng);
std::vector<double> sample_beta(double alpha, double beta, std::size_t n, Rng& rng);

/// Maximum-likelihood covariance (mean removed, divided by n) of n draws
/// from N(0, sigma). A singular estimate is redrawn once before failing.
SpdMatrix sample_gaussian_cov(const SpdMatrix& sigma, std::size_t n, Rng& rng);

}  // namespace otmedian
