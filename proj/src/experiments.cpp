#include "otmedian/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>

#include "otmedian/errors.hpp"

namespace otmedian {

namespace {

// Signal and contamination models of the three contamination studies.
constexpr double kGammaSignal[] = {1.0, 1.0};
constexpr double kGammaContamination[] = {7.5, 0.75};
constexpr double kBetaSignal[] = {2.0, 5.0};
constexpr double kBetaContamination[] = {5.0, 1.0};

Eigen::MatrixXd gaussian_contamination() {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.75, 0.75, 1.0;
  return m;
}

bool non_increasing(const std::vector<double>& trace) {
  const double slack = 1e-9 * std::max(1.0, trace.empty() ? 0.0 : trace.front());
  for (std::size_t t = 1; t < trace.size(); ++t)
    if (trace[t] > trace[t - 1] + slack) return false;
  return true;
}

template <typename Result>
void record_median(SweepRow& row, const Result& r) {
  row.median_descent = non_increasing(r.objective_trace);
  row.median_iterations = r.iterations;
}

SweepRow run_cell(const ContaminationConfig& cfg, std::size_t k, std::size_t n,
                  std::size_t rep) {
  SweepRow row;
  row.k = k;
  row.sample_size = n;
  row.replicate = rep;
  Rng rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(cfg.family), k, n, rep});
  const std::size_t signal_count = cfg.total - k;
  const SimplexWeights uniform = SimplexWeights::uniform(cfg.total);

  switch (cfg.family) {
    case Family::univariate_gamma: {
      std::vector<QuantileFunction> qs;
      qs.reserve(cfg.total);
      for (std::size_t i = 0; i < cfg.total; ++i) {
        const double* p = i < signal_count ? kGammaSignal : kGammaContamination;
        qs.push_back(quantile_from_sample(sample_gamma(p[0], p[1], n, rng), cfg.quantile_grid));
      }
      const auto truth = gamma_quantiles(kGammaSignal[0], kGammaSignal[1], cfg.quantile_grid);
      const auto median = median_1d(qs, uniform, cfg.irls);
      row.error_barycenter = w2_1d(bary_1d(uniform, qs), truth);
      row.error_median = w2_1d(median.centroid, truth);
      record_median(row, median);
      break;
    }
    case Family::gaussian: {
      const SpdMatrix signal = SpdMatrix::identity(2);
      const SpdMatrix contamination(gaussian_contamination());
      std::vector<SpdMatrix> covs;
      covs.reserve(cfg.total);
      for (std::size_t i = 0; i < cfg.total; ++i)
        covs.push_back(sample_gaussian_cov(i < signal_count ? signal : contamination, n, rng));
      const auto median = median_gaussian(covs, uniform, cfg.irls, cfg.gaussian);
      row.error_barycenter = w2_gaussian(bary_gaussian(uniform, covs, cfg.gaussian), signal);
      row.error_median = w2_gaussian(median.centroid, signal);
      record_median(row, median);
      break;
    }
    case Family::histogram_beta: {
      std::vector<GridMeasure> hs;
      hs.reserve(cfg.total);
      for (std::size_t i = 0; i < cfg.total; ++i) {
        const double* p = i < signal_count ? kBetaSignal : kBetaContamination;
        hs.push_back(histogram_from_sample(sample_beta(p[0], p[1], n, rng), cfg.bins));
      }
      const auto truth = beta_histogram(kBetaSignal[0], kBetaSignal[1], cfg.bins);
      GridSpace space(hs.front(), cfg.sinkhorn, cfg.grid);
      const auto median = irls_median(space, hs, uniform, cfg.irls);
      row.error_barycenter = exact_lp_w2(bary_grid(uniform, hs, cfg.grid), truth);
      row.error_median = exact_lp_w2(median.centroid, truth);
      record_median(row, median);
      break;
    }
  }
  return row;
}

}  // namespace

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::univariate_gamma: return "univariate_gamma";
    case Family::gaussian: return "gaussian";
    case Family::histogram_beta: return "histogram_beta";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "univariate_gamma" || name == "univariate") return Family::univariate_gamma;
  if (name == "gaussian") return Family::gaussian;
  if (name == "histogram_beta" || name == "histogram") return Family::histogram_beta;
  throw InvalidInput("unknown family '" + std::string(name) + "'");
}

void ContaminationConfig::validate() const {
  if (total == 0) throw InvalidInput("contamination config: total must be >= 1");
  if (replicates == 0) throw InvalidInput("contamination config: replicates must be >= 1");
  for (std::size_t k : contamination_counts)
    if (k >= total) throw InvalidInput("contamination config: each k must lie in [0, total)");
  for (std::size_t n : sample_sizes)
    if (n == 0) throw InvalidInput("contamination config: sample sizes must be positive");
  if (family == Family::gaussian)
    for (std::size_t n : sample_sizes)
      if (n < 2) throw InvalidInput("contamination config: gaussian family needs n >= 2");
  if (quantile_grid < 2) throw InvalidInput("contamination config: quantile_grid must be >= 2");
  if (bins == 0) throw InvalidInput("contamination config: bins must be >= 1");
  irls.validate();
  gaussian.validate();
  sinkhorn.validate();
  grid.validate();
}

void canonical_sort(SweepResult& result) {
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return std::tie(a.k, a.sample_size, a.replicate) <
                            std::tie(b.k, b.sample_size, b.replicate);
                   });
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

SweepResult run_contamination(const ContaminationConfig& cfg, unsigned threads,
                              const std::function<void(std::size_t, std::size_t)>& progress) {
  cfg.validate();
  struct Cell {
    std::size_t k, n, rep;
  };
  std::vector<Cell> cells;
  for (std::size_t k : cfg.contamination_counts)
    for (std::size_t n : cfg.sample_sizes)
      for (std::size_t rep = 0; rep < cfg.replicates; ++rep) cells.push_back({k, n, rep});

  SweepResult result;
  result.rows.resize(cells.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    const Cell& c = cells[i];
    SweepRow row;
    try {
      row = run_cell(cfg, c.k, c.n, c.rep);
    } catch (const ConvergenceError& e) {
      row.k = c.k;
      row.sample_size = c.n;
      row.replicate = c.rep;
      row.error_median = row.error_barycenter = std::nan("");
      row.flagged = true;
      row.note = e.what();
    }
    result.rows[i] = std::move(row);
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished, cells.size());
    }
  });
  canonical_sort(result);
  return result;
}

QuantileFunction gamma_quantiles(double shape, double scale, std::size_t grid_size) {
  const boost::math::gamma_distribution<double> dist(shape, scale);
  std::vector<double> values(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j)
    values[j] = boost::math::quantile(dist, QuantileFunction::grid_point(j, grid_size));
  return QuantileFunction(std::move(values));
}

GridMeasure beta_histogram(double alpha, double beta, std::size_t bins) {
  const boost::math::beta_distribution<double> dist(alpha, beta);
  std::vector<double> mass(bins);
  double prev = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double upper = i + 1 == bins ? 1.0
                                       : boost::math::cdf(dist, static_cast<double>(i + 1) /
                                                                    static_cast<double>(bins));
    mass[i] = upper - prev;
    prev = upper;
  }
  return GridMeasure::on_unit_grid({bins}, std::move(mass));
}

std::size_t support_size(const GridMeasure& m, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(m.mass().begin(), m.mass().end(), [&](double v) { return v > threshold; }));
}

}  // namespace otmedian
