#include "otmedian/json_io.hpp"

#include "otmedian/errors.hpp"
#include "otmedian/io.hpp"

namespace otmedian::io {

namespace {

std::vector<double> real_array(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidInput(std::string(what) + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <typename T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

GaussianBarycenterRule rule_from_string(const std::string& s) {
  if (s == "ruschendorf") return GaussianBarycenterRule::ruschendorf;
  if (s == "alvarez" || s == "alvarez_esteban") return GaussianBarycenterRule::alvarez_esteban;
  throw InvalidInput("unknown barycenter rule '" + s + "'");
}

}  // namespace

QuantileFunction quantile_from_json(const json& j, std::size_t grid_size) {
  if (j.is_number())
    return QuantileFunction(std::vector<double>(grid_size, j.get<double>()));
  if (j.is_object() && j.contains("sample"))
    return quantile_from_sample(real_array(j.at("sample"), "sample"), grid_size);
  if (j.is_object() && j.contains("quantiles"))
    return QuantileFunction(real_array(j.at("quantiles"), "quantiles"));
  return QuantileFunction(real_array(j, "quantile function"));
}

json to_json(const QuantileFunction& q) {
  return json(std::vector<double>(q.values().begin(), q.values().end()));
}

SpdMatrix spd_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidInput("covariance: expected a square array");
  const auto d = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto row = real_array(j.at(static_cast<std::size_t>(r)), "covariance row");
    if (static_cast<Eigen::Index>(row.size()) != d)
      throw InvalidInput("covariance: expected a square array");
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return SpdMatrix(m);
}

json to_json(const SpdMatrix& s) {
  json out = json::array();
  for (Eigen::Index r = 0; r < s.dim(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < s.dim(); ++c) row.push_back(s.matrix()(r, c));
    out.push_back(row);
  }
  return out;
}

GridMeasure grid_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("grid measure: expected an object");
  if (j.contains("pixels")) {
    std::vector<std::vector<double>> pixels;
    for (const auto& row : j.at("pixels")) pixels.push_back(real_array(row, "pixels"));
    return normalize_image(pixels);
  }
  if (!j.contains("mass")) throw InvalidInput("grid measure: missing 'mass'");
  auto mass = real_array(j.at("mass"), "mass");
  std::vector<std::size_t> shape;
  if (j.contains("shape")) {
    shape = j.at("shape").get<std::vector<std::size_t>>();
  } else {
    shape = {mass.size()};
  }
  if (!j.contains("coordinates")) return GridMeasure::on_unit_grid(shape, std::move(mass));
  std::vector<std::vector<double>> axes;
  for (const auto& ax : j.at("coordinates")) axes.push_back(real_array(ax, "coordinates"));
  return GridMeasure(std::move(shape), std::move(axes), std::move(mass));
}

json to_json(const GridMeasure& m) {
  return json{{"shape", m.shape()},
              {"coordinates", m.axes()},
              {"mass", std::vector<double>(m.mass().begin(), m.mass().end())}};
}

SimplexWeights weights_from_json(const json& doc, std::size_t count) {
  if (!doc.contains("weights")) return SimplexWeights::uniform(count);
  const auto w = real_array(doc.at("weights"), "weights");
  if (w.size() != count)
    throw InvalidInput("weights: expected " + std::to_string(count) + " entries");
  return SimplexWeights::normalized(w);
}

ContaminationConfig contamination_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  ContaminationConfig cfg;
  try {
    if (j.contains("family")) cfg.family = family_from_string(j.at("family").get<std::string>());
    read_if(j, "total", cfg.total);
    read_if(j, "contamination_counts", cfg.contamination_counts);
    read_if(j, "sample_sizes", cfg.sample_sizes);
    read_if(j, "replicates", cfg.replicates);
    read_if(j, "seed", cfg.seed);
    read_if(j, "quantile_grid", cfg.quantile_grid);
    read_if(j, "bins", cfg.bins);
    if (j.contains("irls")) {
      const auto& s = j.at("irls");
      read_if(s, "max_outer", cfg.irls.max_outer);
      read_if(s, "discrepancy_tol", cfg.irls.discrepancy_tol);
      read_if(s, "coincidence_tol", cfg.irls.coincidence_tol);
    }
    if (j.contains("gaussian")) {
      const auto& s = j.at("gaussian");
      if (s.contains("rule")) cfg.gaussian.rule = rule_from_string(s.at("rule").get<std::string>());
      read_if(s, "max_iter", cfg.gaussian.max_iter);
      read_if(s, "tol", cfg.gaussian.tol);
    }
    if (j.contains("sinkhorn")) {
      const auto& s = j.at("sinkhorn");
      read_if(s, "epsilon", cfg.sinkhorn.epsilon);
      read_if(s, "max_iter", cfg.sinkhorn.max_iter);
      read_if(s, "tol", cfg.sinkhorn.tol);
      read_if(s, "debiased", cfg.sinkhorn.debiased);
    }
    if (j.contains("grid")) {
      const auto& s = j.at("grid");
      read_if(s, "epsilon", cfg.grid.epsilon);
      read_if(s, "inner_iter", cfg.grid.inner_iter);
      read_if(s, "tol", cfg.grid.tol);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const ContaminationConfig& cfg) {
  return json{
      {"family", std::string(to_string(cfg.family))},
      {"total", cfg.total},
      {"contamination_counts", cfg.contamination_counts},
      {"sample_sizes", cfg.sample_sizes},
      {"replicates", cfg.replicates},
      {"seed", cfg.seed},
      {"quantile_grid", cfg.quantile_grid},
      {"bins", cfg.bins},
      {"irls",
       {{"max_outer", cfg.irls.max_outer},
        {"discrepancy_tol", cfg.irls.discrepancy_tol},
        {"coincidence_tol", cfg.irls.coincidence_tol}}},
      {"gaussian",
       {{"rule", cfg.gaussian.rule == GaussianBarycenterRule::ruschendorf ? "ruschendorf"
                                                                          : "alvarez_esteban"},
        {"max_iter", cfg.gaussian.max_iter},
        {"tol", cfg.gaussian.tol}}},
      {"sinkhorn",
       {{"epsilon", cfg.sinkhorn.epsilon},
        {"max_iter", cfg.sinkhorn.max_iter},
        {"tol", cfg.sinkhorn.tol},
        {"debiased", cfg.sinkhorn.debiased}}},
      {"grid",
       {{"epsilon", cfg.grid.epsilon},
        {"inner_iter", cfg.grid.inner_iter},
        {"tol", cfg.grid.tol}}}};
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what(), e.byte);
  }
}

}  // namespace otmedian::io
