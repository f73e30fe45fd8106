// otmedian: command-line front end.
//
// Exit codes: 0 success, 1 invalid arguments, 2 solver non-convergence,
// 3 I/O or parse failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otmedian/barycenter.hpp"
#include "otmedian/distances.hpp"
#include "otmedian/errors.hpp"
#include "otmedian/experiments.hpp"
#include "otmedian/io.hpp"
#include "otmedian/json_io.hpp"
#include "otmedian/median.hpp"

using namespace otmedian;
using nlohmann::json;

namespace {

enum class CliFamily { univariate, gaussian, grid };

struct Options {
  std::optional<CliFamily> family;
  std::string input;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> epsilon;
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::optional<GaussianBarycenterRule> rule;
  std::size_t per_digit = 20;
};

// Errors while reading a named input; reported with exit code 3.
class InputError : public Error {
 public:
  InputError(const std::string& path, const std::string& what)
      : Error("'" + path + "': " + what) {}
};

constexpr std::size_t kDefaultGridSize = 1000;

unsigned worker_count(const Options& opt) {
  if (opt.threads) return std::max(1u, *opt.threads);
  if (const char* env = std::getenv("OTMEDIAN_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw InvalidInput("OTMEDIAN_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  return 1;
}

CliFamily require_family(const Options& opt) {
  if (!opt.family) throw InvalidInput("--family is required for this subcommand");
  return *opt.family;
}

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidInput(std::string(flag) + " is required for this subcommand");
  return value;
}

std::string family_name(CliFamily f) {
  switch (f) {
    case CliFamily::univariate: return "univariate";
    case CliFamily::gaussian: return "gaussian";
    case CliFamily::grid: return "grid";
  }
  return {};
}

// Input document: {"measures": [...], "weights": [...], "grid_size": K}.
struct Inputs {
  json doc;
  std::vector<QuantileFunction> quantiles;
  std::vector<SpdMatrix> covariances;
  std::vector<GridMeasure> grids;
  std::size_t count = 0;
  SimplexWeights weights = SimplexWeights::uniform(1);
};

Inputs load_inputs(const std::string& path, CliFamily family) {
  Inputs in;
  try {
    in.doc = io::parse_json_file(path);
    if (!in.doc.is_object() || !in.doc.contains("measures") || !in.doc.at("measures").is_array())
      throw InvalidInput("expected an object with a \"measures\" array");
    const json& ms = in.doc.at("measures");
    if (ms.empty()) throw InvalidInput("\"measures\" is empty");
    const std::size_t grid_size = in.doc.value("grid_size", kDefaultGridSize);
    for (const auto& m : ms) {
      switch (family) {
        case CliFamily::univariate: in.quantiles.push_back(io::quantile_from_json(m, grid_size)); break;
        case CliFamily::gaussian: in.covariances.push_back(io::spd_from_json(m)); break;
        case CliFamily::grid: in.grids.push_back(io::grid_from_json(m)); break;
      }
    }
    in.count = ms.size();
    in.weights = io::weights_from_json(in.doc, in.count);
  } catch (const IoError& e) {
    throw InputError(path, e.what());
  } catch (const ParseError& e) {
    throw;
  } catch (const InvalidInput& e) {
    throw InputError(path, e.what());
  } catch (const json::exception& e) {
    throw InputError(path, e.what());
  }
  return in;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  io::write_text_file(path, text);
}

SinkhornConfig sinkhorn_config(const Options& opt) {
  SinkhornConfig cfg;
  if (opt.epsilon) cfg.epsilon = *opt.epsilon;
  return cfg;
}

GridBarycenterConfig grid_config(const Options& opt) {
  GridBarycenterConfig cfg;
  if (opt.epsilon) cfg.epsilon = *opt.epsilon;
  return cfg;
}

GaussianBarycenterConfig gaussian_config(const Options& opt) {
  GaussianBarycenterConfig cfg;
  if (opt.rule) cfg.rule = *opt.rule;
  return cfg;
}

int cmd_distance(const Options& opt) {
  const CliFamily family = require_family(opt);
  const Inputs in = load_inputs(require(opt.input, "--input"), family);
  if (in.count != 2)
    throw InputError(opt.input, "distance needs exactly two measures, got " + std::to_string(in.count));
  double d = 0.0;
  switch (family) {
    case CliFamily::univariate: d = w2_1d(in.quantiles[0], in.quantiles[1]); break;
    case CliFamily::gaussian: d = w2_gaussian(in.covariances[0], in.covariances[1]); break;
    case CliFamily::grid: {
      SinkhornConfig cfg = sinkhorn_config(opt);
      if (opt.max_iter) cfg.max_iter = *opt.max_iter;
      if (opt.tol) cfg.tol = *opt.tol;
      d = sinkhorn_distance(in.grids[0], in.grids[1], cfg);
      break;
    }
  }
  const json summary{{"family", family_name(family)}, {"distance", d}};
  write_output(opt.out, summary.dump(2) + "\n");
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_barycenter(const Options& opt) {
  const CliFamily family = require_family(opt);
  const Inputs in = load_inputs(require(opt.input, "--input"), family);
  json result{{"family", family_name(family)}};
  json summary = result;
  switch (family) {
    case CliFamily::univariate:
      result["barycenter"] = io::to_json(bary_1d(in.weights, in.quantiles));
      break;
    case CliFamily::gaussian: {
      GaussianBarycenterConfig cfg = gaussian_config(opt);
      if (opt.max_iter) cfg.max_iter = *opt.max_iter;
      if (opt.tol) cfg.tol = *opt.tol;
      const auto report = bary_gaussian_report(in.weights, in.covariances, cfg, nullptr, false);
      result["barycenter"] = io::to_json(SpdMatrix(report.matrix));
      summary["iterations"] = report.iterations;
      summary["residual"] = report.residual;
      break;
    }
    case CliFamily::grid: {
      GridBarycenterConfig cfg = grid_config(opt);
      if (opt.max_iter) cfg.inner_iter = *opt.max_iter;
      if (opt.tol) cfg.tol = *opt.tol;
      result["barycenter"] = io::to_json(bary_grid(in.weights, in.grids, cfg));
      break;
    }
  }
  write_output(opt.out, result.dump(2) + "\n");
  summary["out"] = opt.out;
  if (opt.out.empty()) summary["barycenter"] = result["barycenter"];
  std::cout << summary.dump() << "\n";
  return 0;
}

template <typename M>
json median_summary(const MedianResult<M>& r) {
  json s{{"termination", std::string(to_string(r.termination))},
         {"iterations", r.iterations},
         {"objective", r.objective_trace.back()},
         {"objective_trace", r.objective_trace},
         {"weights", r.weights_final}};
  if (r.coincident_input) s["coincident_input"] = *r.coincident_input;
  return s;
}

int cmd_median(const Options& opt) {
  const CliFamily family = require_family(opt);
  const Inputs in = load_inputs(require(opt.input, "--input"), family);
  IrlsConfig irls;
  if (opt.max_iter) irls.max_outer = *opt.max_iter;
  if (opt.tol) irls.discrepancy_tol = *opt.tol;
  json summary;
  json centroid;
  switch (family) {
    case CliFamily::univariate: {
      const auto r = median_1d(in.quantiles, in.weights, irls);
      summary = median_summary(r);
      centroid = io::to_json(r.centroid);
      break;
    }
    case CliFamily::gaussian: {
      const auto r = median_gaussian(in.covariances, in.weights, irls, gaussian_config(opt));
      summary = median_summary(r);
      centroid = io::to_json(r.centroid);
      break;
    }
    case CliFamily::grid: {
      const auto r = median_grid(in.grids, in.weights, irls, sinkhorn_config(opt), grid_config(opt));
      summary = median_summary(r);
      centroid = io::to_json(r.centroid);
      break;
    }
  }
  summary["family"] = family_name(family);
  json result = summary;
  result["median"] = centroid;
  write_output(opt.out, result.dump(2) + "\n");
  summary["out"] = opt.out;
  if (opt.out.empty()) summary["median"] = centroid;
  std::cout << summary.dump() << "\n";
  return 0;
}

ContaminationConfig load_sweep_config(const Options& opt) {
  const std::string& path = require(opt.config, "--config");
  ContaminationConfig cfg;
  try {
    cfg = io::contamination_config_from_json(io::parse_json_file(path));
  } catch (const IoError& e) {
    throw InputError(path, e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw InputError(path, e.what());
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.rule) cfg.gaussian.rule = *opt.rule;
  if (opt.epsilon) {
    cfg.sinkhorn.epsilon = *opt.epsilon;
    cfg.grid.epsilon = *opt.epsilon;
  }
  if (opt.max_iter) cfg.irls.max_outer = *opt.max_iter;
  if (opt.tol) cfg.irls.discrepancy_tol = *opt.tol;
  cfg.validate();
  return cfg;
}

int cmd_sweep(const Options& opt) {
  const ContaminationConfig cfg = load_sweep_config(opt);
  const unsigned threads = worker_count(opt);
  std::cerr << "sweep: family " << to_string(cfg.family) << ", seed " << cfg.seed << ", "
            << threads << " thread(s)\n";
  const SweepResult result = run_contamination(cfg, threads, [](std::size_t done, std::size_t total) {
    std::cerr << "\rsweep: " << done << "/" << total << " cells" << (done == total ? "\n" : "")
              << std::flush;
  });
  const std::string csv = io::format_sweep_csv(result);
  if (opt.out.empty())
    std::cerr << "sweep: no --out given, CSV not written\n";
  else
    io::write_text_file(opt.out, csv);

  std::map<std::pair<std::size_t, std::size_t>, std::array<double, 3>> cells;
  std::size_t flagged = 0;
  for (const auto& r : result.rows) {
    if (r.flagged) {
      ++flagged;
      continue;
    }
    auto& c = cells[{r.k, r.sample_size}];
    c[0] += r.error_median;
    c[1] += r.error_barycenter;
    c[2] += 1.0;
  }
  json means = json::array();
  for (const auto& [key, c] : cells)
    means.push_back({{"k", key.first},
                     {"sample_size", key.second},
                     {"mean_error_median", c[0] / c[2]},
                     {"mean_error_barycenter", c[1] / c[2]}});
  const json summary{{"family", std::string(to_string(cfg.family))},
                     {"seed", cfg.seed},
                     {"rows", result.rows.size()},
                     {"flagged_rows", flagged},
                     {"out", opt.out},
                     {"means", means}};
  std::cout << summary.dump() << "\n";
  return 0;
}

std::string find_idx(const std::filesystem::path& dir, const std::string& stem) {
  for (const std::string suffix : {"", ".gz"}) {
    const auto p = dir / (stem + suffix);
    if (std::filesystem::exists(p)) return p.string();
  }
  throw InputError(dir.string(), "no " + stem + " (or .gz) in this directory");
}

int cmd_mnist(const Options& opt) {
  const unsigned threads = worker_count(opt);
  MnistConfig cfg;
  if (opt.epsilon) {
    cfg.sinkhorn.epsilon = *opt.epsilon;
    cfg.grid.epsilon = *opt.epsilon;
  }
  if (opt.max_iter) cfg.irls.max_outer = *opt.max_iter;
  if (opt.tol) cfg.irls.discrepancy_tol = *opt.tol;

  std::vector<ByteImage> images;
  std::vector<std::uint8_t> labels;
  std::string source;
  if (opt.input.empty()) {
    Rng rng(opt.seed.value_or(0));
    synthetic_blob_digits(opt.per_digit, 28, rng, images, labels);
    source = "synthetic";
  } else {
    const std::string images_path = find_idx(opt.input, "train-images-idx3-ubyte");
    const std::string labels_path = find_idx(opt.input, "train-labels-idx1-ubyte");
    images = io::read_idx_images(images_path);
    labels = io::read_idx_labels(labels_path);
    source = images_path;
  }
  std::cerr << "mnist: " << source << ", " << opt.per_digit << " image(s) per digit, " << threads
            << " thread(s)\n";
  const auto digits = mnist_centroids(images, labels, opt.per_digit, cfg, threads);

  std::vector<std::vector<GridMeasure>> rows(3);
  json per_digit = json::array();
  for (const auto& d : digits) {
    rows[0].push_back(d.mean);
    rows[1].push_back(d.barycenter);
    rows[2].push_back(d.median);
    per_digit.push_back({{"digit", d.digit},
                         {"count", d.count},
                         {"support_mean", support_size(d.mean, 1e-4)},
                         {"support_barycenter", support_size(d.barycenter, 1e-4)},
                         {"support_median", support_size(d.median, 1e-4)},
                         {"median_termination", std::string(to_string(d.median_termination))}});
  }
  write_output(opt.out, io::render_image_grid_svg(rows, {"mean", "barycenter", "median"}));
  const json summary{{"source", source}, {"out", opt.out}, {"digits", per_digit}};
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein distances, barycenters and medians"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Options opt;
  const std::map<std::string, CliFamily> families{{"univariate", CliFamily::univariate},
                                                   {"gaussian", CliFamily::gaussian},
                                                   {"grid", CliFamily::grid}};
  const std::map<std::string, GaussianBarycenterRule> rules{
      {"ruschendorf", GaussianBarycenterRule::ruschendorf},
      {"alvarez", GaussianBarycenterRule::alvarez_esteban}};

  app.add_option("--family", opt.family, "Measure family: univariate, gaussian or grid")
      ->transform(CLI::CheckedTransformer(families, CLI::ignore_case))
      ->option_text("univariate|gaussian|grid");
  app.add_option("--input", opt.input,
                 "JSON file {\"measures\": [...], \"weights\": [...]}; for mnist, a directory "
                 "holding the IDX training files (synthetic images when omitted)");
  app.add_option("--config", opt.config, "JSON sweep configuration");
  app.add_option("--out", opt.out, "Output path (JSON, CSV for sweep, SVG for mnist)");
  app.add_option("--seed", opt.seed, "Seed override");
  app.add_option("--threads", opt.threads, "Worker threads (default: $OTMEDIAN_THREADS, else 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--epsilon", opt.epsilon, "Entropic regularisation for grid measures")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-iter", opt.max_iter,
                 "Iteration cap of the outer solver (IRLS for median/sweep/mnist)")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", opt.tol, "Tolerance of the outer solver")->check(CLI::PositiveNumber);
  app.add_option("--rule", opt.rule, "Gaussian barycenter fixed point: ruschendorf or alvarez")
      ->transform(CLI::CheckedTransformer(rules, CLI::ignore_case))
      ->option_text("ruschendorf|alvarez");
  app.add_option("--per-digit", opt.per_digit, "mnist: images per digit")->check(CLI::PositiveNumber);

  std::map<std::string, int (*)(const Options&)> handlers{{"distance", cmd_distance},
                                                           {"barycenter", cmd_barycenter},
                                                           {"median", cmd_median},
                                                           {"sweep", cmd_sweep},
                                                           {"mnist", cmd_mnist}};
  app.add_subcommand("distance", "W2 distance between two measures");
  app.add_subcommand("barycenter", "Weighted W2 barycenter");
  app.add_subcommand("median", "Weighted Wasserstein median (IRLS)");
  app.add_subcommand("sweep", "Contamination experiment, CSV output");
  app.add_subcommand("mnist", "Digit centroids: mean, barycenter and median, SVG output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return handlers.at(name)(opt);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
