#pragma once

#include <optional>
#include <vector>

#include "otmedian/distances.hpp"
#include "otmedian/measures.hpp"

namespace otmedian {

/// Closed-form 1D barycenter: the weighted average of quantile functions.
QuantileFunction bary_1d(const SimplexWeights& weights,
                         const std::vector<QuantileFunction>& qs);

enum class GaussianBarycenterRule { ruschendorf, alvarez_esteban };

struct GaussianBarycenterConfig {
  GaussianBarycenterRule rule = GaussianBarycenterRule::alvarez_esteban;
  int max_iter = 1000;
  double tol = 1e-12;  // Frobenius distance between consecutive iterates

  void validate() const;
};

struct GaussianBarycenterReport {
  Eigen::MatrixXd matrix;
  int iterations = 0;
  double residual = 0.0;  // ||sum_n l_n (S^1/2 S_n S^1/2)^1/2 - S||_F / ||S||_F
  std::vector<double> frechet_trace;  // sum_n l_n W2^2(S_k, S_n), when requested
};

/// Fixed-point barycenter of centered Gaussians. Starts from `initial` when
/// given, otherwise from the weighted arithmetic mean of the inputs.
SpdMatrix bary_gaussian(const SimplexWeights& weights,
                        const std::vector<SpdMatrix>& sigmas,
                        const GaussianBarycenterConfig& cfg,
                        const std::optional<SpdMatrix>& initial = std::nullopt);

GaussianBarycenterReport bary_gaussian_report(
    const SimplexWeights& weights, const std::vector<SpdMatrix>& sigmas,
    const GaussianBarycenterConfig& cfg, const Eigen::MatrixXd* initial,
    bool record_frechet);

struct GridBarycenterConfig {
  double epsilon = 1e-3;
  int inner_iter = 100000;
  double tol = 1e-7;  // L1 change of the barycenter between iterations

  void validate() const;
};

/// Log-domain scaling variables of the debiased barycenter iteration, kept so
/// that repeated solves with slowly changing weights can warm-start.
struct GridBarycenterState {
  std::vector<std::vector<double>> log_b;  // one per input
  std::vector<double> log_d;
};

/// Entropic barycenter on a shared grid by debiased iterative Bregman
/// projections in the log domain.
GridMeasure bary_grid(const SimplexWeights& weights,
                      const std::vector<GridMeasure>& ms,
                      const GridBarycenterConfig& cfg,
                      GridBarycenterState* state = nullptr);

}  // namespace otmedian
