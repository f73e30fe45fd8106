#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "otmedian/barycenter.hpp"
#include "otmedian/median.hpp"
#include "otmedian/random.hpp"

namespace otmedian {

enum class Family { univariate_gamma, gaussian, histogram_beta };

std::string_view to_string(Family f) noexcept;
Family family_from_string(std::string_view name);

struct ContaminationConfig {
  std::size_t total = 100;
  std::vector<std::size_t> contamination_counts{1, 5, 10, 25};
  std::vector<std::size_t> sample_sizes{10, 50, 100, 500};
  std::size_t replicates = 50;
  std::uint64_t seed = 0;
  Family family = Family::univariate_gamma;

  // Working resolution.
  std::size_t quantile_grid = 1000;
  std::size_t bins = 20;

  IrlsConfig irls{};
  GaussianBarycenterConfig gaussian{};
  SinkhornConfig sinkhorn{2.5e-3, 20000, 1e-7, true};
  GridBarycenterConfig grid{2.5e-3, 100000, 1e-7};

  void validate() const;
};

struct SweepRow {
  std::size_t k = 0;
  std::size_t sample_size = 0;
  std::size_t replicate = 0;
  double error_median = 0.0;
  double error_barycenter = 0.0;
  // Not serialised: solver diagnostics for the row.
  bool flagged = false;
  std::string note;
  bool median_descent = true;
  int median_iterations = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Sorts rows by (k, sample_size, replicate).
void canonical_sort(SweepResult& result);

/// One row per (k, sample size, replicate). Each cell draws from its own
/// random stream, so the output does not depend on `threads`.
SweepResult run_contamination(const ContaminationConfig& cfg, unsigned threads = 1,
                              const std::function<void(std::size_t, std::size_t)>&
                                  progress = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

/// Exact signal references at the working resolution.
QuantileFunction gamma_quantiles(double shape, double scale, std::size_t grid_size);
GridMeasure beta_histogram(double alpha, double beta, std::size_t bins);

struct ByteImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

struct MnistConfig {
  SinkhornConfig sinkhorn{1.5e-3, 20000, 1e-6, true};
  GridBarycenterConfig grid{1.5e-3, 20000, 1e-5};
  IrlsConfig irls{30, 1e-5, 1e-12, IrlsInit::uniform_barycenter};
};

struct DigitCentroids {
  int digit = 0;
  std::size_t count = 0;
  GridMeasure mean;
  GridMeasure barycenter;
  GridMeasure median;
  Termination median_termination = Termination::max_iterations;
};

GridMeasure byte_image_measure(const ByteImage& image);

/// Arithmetic mean, barycenter and median of the first `per_digit` images of
/// every label 0..9.
std::vector<DigitCentroids> mnist_centroids(const std::vector<ByteImage>& images,
                                            const std::vector<std::uint8_t>& labels,
                                            std::size_t per_digit,
                                            const MnistConfig& cfg = {},
                                            unsigned threads = 1);

std::vector<DigitCentroids> run_mnist(const std::string& images_path,
                                      const std::string& labels_path,
                                      std::size_t per_digit,
                                      const MnistConfig& cfg = {},
                                      unsigned threads = 1);

/// Synthetic stand-in for digit images: each class is a pair of Gaussian
/// blobs at class-specific positions, jittered per image.
void synthetic_blob_digits(std::size_t per_digit, std::size_t side, Rng& rng,
                           std::vector<ByteImage>& images,
                           std::vector<std::uint8_t>& labels);

/// Number of bins with mass strictly above `threshold`.
std::size_t support_size(const GridMeasure& m, double threshold);

}  // namespace otmedian
