#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "otmedian/errors.hpp"
#include "otmedian/io.hpp"

namespace otmedian::io {

namespace {

constexpr const char* kHeader = "k,sample_size,replicate,error_median,error_barycenter";

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_real(const std::string& field, std::size_t line) {
  if (field == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw ParseError("csv: bad number '" + field + "' on line " + std::to_string(line), 0);
  }
}

std::size_t parse_count(const std::string& field, std::size_t line) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("csv: bad integer '" + field + "' on line " + std::to_string(line), 0);
  }
}

}  // namespace

std::string format_sweep_csv(const SweepResult& result) {
  SweepResult sorted = result;
  canonical_sort(sorted);
  std::string out = kHeader;
  out += '\n';
  for (const auto& r : sorted.rows) {
    out += std::to_string(r.k) + ',' + std::to_string(r.sample_size) + ',' +
           std::to_string(r.replicate) + ',' + format_real(r.error_median) + ',' +
           format_real(r.error_barycenter) + '\n';
  }
  return out;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  write_text_file(path, format_sweep_csv(result));
}

SweepResult parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw ParseError("csv: missing or unexpected header", 0);
  SweepResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5)
      throw ParseError("csv: expected 5 fields on line " + std::to_string(line_no), 0);
    SweepRow row;
    row.k = parse_count(fields[0], line_no);
    row.sample_size = parse_count(fields[1], line_no);
    row.replicate = parse_count(fields[2], line_no);
    row.error_median = parse_real(fields[3], line_no);
    row.error_barycenter = parse_real(fields[4], line_no);
    row.flagged = std::isnan(row.error_median) || std::isnan(row.error_barycenter);
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace otmedian::io
