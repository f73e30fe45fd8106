#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "otmedian/experiments.hpp"
#include "otmedian/measures.hpp"

namespace otmedian::io {

using nlohmann::json;

/// Univariate measures are an array of quantile values, an object
/// {"sample": [...]} turned into quantiles on `grid_size` points, or a bare
/// number for a Dirac mass.
QuantileFunction quantile_from_json(const json& j, std::size_t grid_size);
json to_json(const QuantileFunction& q);

/// A d x d array of arrays.
SpdMatrix spd_from_json(const json& j);
json to_json(const SpdMatrix& s);

/// {"shape": [...], "mass": [...], "coordinates": [[...], ...]} with
/// coordinates defaulting to unit-interval midpoints, or {"pixels": [[...]]}
/// for an image that is L1-normalised on load.
GridMeasure grid_from_json(const json& j);
json to_json(const GridMeasure& m);

/// Weights under "weights", or uniform when absent.
SimplexWeights weights_from_json(const json& doc, std::size_t count);

/// Fields mirror ContaminationConfig; absent fields keep their defaults.
ContaminationConfig contamination_config_from_json(const json& j);
json to_json(const ContaminationConfig& cfg);

json parse_json_file(const std::string& path);

}  // namespace otmedian::io
