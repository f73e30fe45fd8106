#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <zlib.h>

#include "otmedian/errors.hpp"
#include "otmedian/io.hpp"
#include "otmedian/json_io.hpp"

using namespace otmedian;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "otmedian_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::uint8_t> image_fixture() {
  return {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 128, 255, 64};
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Minimal XML check: balanced, properly nested tags and quoted attributes.
bool well_formed_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  while ((i = s.find('<', i)) != std::string::npos) {
    const auto close = s.find('>', i);
    if (close == std::string::npos) return false;
    std::string tag = s.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.empty()) return false;
    if (tag.front() == '?') {
      if (tag.back() != '?') return false;
      continue;
    }
    if (count_of(tag, "\"") % 2 != 0) return false;
    if (tag.front() == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    if (stack.empty()) {
      if (root_seen) return false;
      root_seen = true;
    }
    if (!self_closing) stack.push_back(name);
  }
  return root_seen && stack.empty();
}

}  // namespace

TEST_CASE("idx fixture parses to a single 2x2 image") {
  const auto images = io::parse_idx_images(image_fixture());
  REQUIRE(images.size() == 1);
  CHECK(images[0].rows == 2);
  CHECK(images[0].cols == 2);
  CHECK(images[0].pixels == std::vector<std::uint8_t>{0, 128, 255, 64});
}

TEST_CASE("idx rejects unknown magic at offset 0") {
  auto bytes = image_fixture();
  bytes[0] = 0;
  bytes[1] = 0;
  bytes[2] = 0x27;
  bytes[3] = 0x0f;  // 9999
  try {
    io::parse_idx_images(bytes);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 0);
  }
}

TEST_CASE("idx rejects non-byte element types") {
  auto bytes = image_fixture();
  bytes[2] = 0x0d;  // float
  CHECK_THROWS_AS(io::parse_idx_images(bytes), ParseError);
}

TEST_CASE("idx rejects truncated and padded payloads") {
  auto bytes = image_fixture();
  bytes.pop_back();
  CHECK_THROWS_AS(io::parse_idx_images(bytes), ParseError);
  bytes = image_fixture();
  bytes.push_back(7);
  CHECK_THROWS_AS(io::parse_idx_images(bytes), ParseError);
  const auto full = image_fixture();
  for (std::size_t len = 0; len < full.size(); ++len) {
    const std::vector<std::uint8_t> prefix(full.begin(), full.begin() + static_cast<long>(len));
    CHECK_THROWS_AS(io::parse_idx_images(prefix), ParseError);
  }
}

TEST_CASE("idx rejects overflowing dimensions") {
  std::vector<std::uint8_t> bytes{0, 0, 8, 3, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff,
                                  0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 1, 2, 3};
  CHECK_THROWS_AS(io::parse_idx_images(bytes), ParseError);
  std::vector<std::uint8_t> empty_images{0, 0, 8, 3, 0xff, 0xff, 0xff, 0xff, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(io::parse_idx_images(empty_images), ParseError);
}

TEST_CASE("idx labels and file kind checks") {
  const std::vector<std::uint8_t> labels{3, 1, 4, 1, 5};
  const auto bytes = io::encode_idx_labels(labels);
  CHECK(io::parse_idx_labels(bytes) == labels);
  CHECK_THROWS_AS(io::parse_idx_images(bytes), ParseError);
  CHECK_THROWS_AS(io::parse_idx_labels(image_fixture()), ParseError);
}

TEST_CASE("idx encode/parse round trip") {
  std::mt19937 rng(5);
  std::vector<ByteImage> images(4, ByteImage{3, 5, {}});
  for (auto& img : images)
    for (int i = 0; i < 15; ++i) img.pixels.push_back(static_cast<std::uint8_t>(rng()));
  const auto back = io::parse_idx_images(io::encode_idx_images(images));
  REQUIRE(back.size() == images.size());
  for (std::size_t i = 0; i < images.size(); ++i) CHECK(back[i].pixels == images[i].pixels);
}

TEST_CASE("idx files, plain and gzip") {
  const auto bytes = image_fixture();
  const auto plain = scratch("fixture.idx");
  io::write_text_file(plain.string(), std::string(bytes.begin(), bytes.end()));
  CHECK(io::read_idx_images(plain.string()).at(0).pixels[2] == 255);

  const auto gz = scratch("fixture.idx.gz");
  gzFile f = gzopen(gz.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
  gzclose(f);
  CHECK(io::read_idx_images(gz.string()).at(0).pixels[1] == 128);

  CHECK_THROWS_AS(io::read_idx_images(scratch("missing.idx").string()), IoError);
}

TEST_CASE("idx random bytes give structured errors") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> len(0, 64), byte(0, 255);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len(rng)));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(byte(rng));
    if (t % 2 == 0 && bytes.size() >= 4) {
      bytes[0] = bytes[1] = 0;
      bytes[2] = 8;
      bytes[3] = 3;
    }
    try {
      io::parse_idx_images(bytes);
    } catch (const ParseError&) {
    }
  }
}

TEST_CASE("csv: empty result is header only") {
  CHECK(io::format_sweep_csv({}) == "k,sample_size,replicate,error_median,error_barycenter\n");
}

TEST_CASE("csv: one row gives exactly two lines") {
  SweepResult r;
  r.rows.push_back({1, 10, 0, 0.5, 0.7});
  const std::string text = io::format_sweep_csv(r);
  CHECK(count_of(text, "\n") == 2);
  CHECK(text == "k,sample_size,replicate,error_median,error_barycenter\n1,10,0,0.5,0.7\n");
}

TEST_CASE("csv: canonical order and lossless round trip") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  SweepResult r;
  for (std::size_t k : {25u, 1u, 5u})
    for (std::size_t rep = 0; rep < 3; ++rep) {
      const double a = std::stod(std::to_string(u(rng)).substr(0, 10));
      r.rows.push_back({k, 100, 2 - rep, a, 1.0 / 3.0});
    }
  r.rows.push_back({10, 50, 0, std::nan(""), 2.0});
  const auto path = scratch("sweep.csv");
  io::write_sweep_csv(r, path.string());
  const std::string text = io::read_text_file(path.string());
  const SweepResult back = io::parse_sweep_csv(text);
  CHECK(io::format_sweep_csv(back) == text);
  REQUIRE(back.rows.size() == r.rows.size());
  for (std::size_t i = 1; i < back.rows.size(); ++i)
    CHECK(std::tie(back.rows[i - 1].k, back.rows[i - 1].sample_size, back.rows[i - 1].replicate) <
          std::tie(back.rows[i].k, back.rows[i].sample_size, back.rows[i].replicate));
  // 12 significant digits
  CHECK(back.rows.front().error_barycenter == std::stod("0.333333333333"));
  for (const auto& row : back.rows) CHECK(row.flagged == (row.k == 10));
}

TEST_CASE("csv: malformed input") {
  CHECK_THROWS_AS(io::parse_sweep_csv(""), ParseError);
  CHECK_THROWS_AS(io::parse_sweep_csv("k,sample_size\n"), ParseError);
  CHECK_THROWS_AS(
      io::parse_sweep_csv("k,sample_size,replicate,error_median,error_barycenter\n1,2,3,x,4\n"),
      ParseError);
  CHECK_THROWS_AS(
      io::parse_sweep_csv("k,sample_size,replicate,error_median,error_barycenter\n1,2,3\n"),
      ParseError);
}

TEST_CASE("svg: one series of two points") {
  const std::string svg = io::render_line_plot_svg({{"median", {{0.0, 1.0}, {1.0, 2.0}}}});
  CHECK(count_of(svg, "<polyline") == 1);
  CHECK(well_formed_xml(svg));
}

TEST_CASE("svg: two series and a two-entry legend") {
  const std::string svg = io::render_line_plot_svg(
      {{"median", {{1, 0.1}, {5, 0.2}, {25, 0.3}}}, {"barycenter & co", {{1, 0.2}, {5, 1.0}, {25, 4.0}}}},
      "error vs k", "k", "error");
  CHECK(count_of(svg, "<polyline") == 2);
  const auto legend = svg.substr(svg.find("class=\"legend\""));
  CHECK(count_of(legend, "<text") == 2);
  CHECK(legend.find("barycenter &amp; co") != std::string::npos);
  CHECK(well_formed_xml(svg));
  const auto path = scratch("plot.svg");
  io::emit_line_plot_svg({{"a", {{0, 0}, {1, 1}}}}, path.string());
  CHECK(well_formed_xml(io::read_text_file(path.string())));
}

TEST_CASE("svg: invalid data") {
  CHECK_THROWS_AS(io::render_line_plot_svg({{"a", {{0.0, std::nan("")}}}}), InvalidInput);
  CHECK_THROWS_AS(io::render_line_plot_svg({{"a", {{INFINITY, 1.0}}}}), InvalidInput);
  CHECK_THROWS_AS(io::render_line_plot_svg({}), InvalidInput);
  CHECK_THROWS_AS(io::render_line_plot_svg({{"a", {{0, 0}}}, {"b", {{0, 0}, {1, 1}}}}), InvalidInput);
}

TEST_CASE("svg: image grid") {
  const GridMeasure m = GridMeasure::on_unit_grid({2, 2}, {0.5, 0.0, 0.25, 0.25});
  const std::string svg = io::render_image_grid_svg({{m, m}}, {"digit 0"});
  CHECK(well_formed_xml(svg));
  CHECK(count_of(svg, "rgb(255,255,255)") == 2);
}

TEST_CASE("json: measures") {
  using io::json;
  const QuantileFunction q = io::quantile_from_json(json::parse("[1, 2, 3]"), 0);
  CHECK(q.grid_size() == 3);
  const QuantileFunction s = io::quantile_from_json(json::parse(R"({"sample": [2, 2, 2]})"), 8);
  CHECK(s.grid_size() == 8);
  CHECK(s[7] == 2.0);

  const SpdMatrix c = io::spd_from_json(json::parse("[[2, 0.5], [0.5, 1]]"));
  CHECK(c.matrix()(0, 1) == 0.5);
  CHECK(io::spd_from_json(io::to_json(c)).matrix() == c.matrix());
  CHECK_THROWS_AS(io::spd_from_json(json::parse("[[1, 2, 3], [4, 5, 6]]")), InvalidInput);

  const GridMeasure g = io::grid_from_json(json::parse(R"({"shape": [2], "mass": [0.25, 0.75]})"));
  CHECK(g.axes()[0] == std::vector<double>{0.25, 0.75});
  CHECK(io::grid_from_json(io::to_json(g)).same_grid(g));
  const GridMeasure img = io::grid_from_json(json::parse(R"({"pixels": [[0, 1], [3, 0]]})"));
  CHECK(img.mass()[2] == doctest::Approx(0.75));

  const auto doc = json::parse(R"({"weights": [1, 3]})");
  CHECK(io::weights_from_json(doc, 2)[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(io::weights_from_json(doc, 3), InvalidInput);
  CHECK(io::weights_from_json(json::object(), 4)[0] == 0.25);
}

TEST_CASE("json: contamination config") {
  using io::json;
  const auto cfg = io::contamination_config_from_json(json::parse(
      R"({"family": "gaussian", "replicates": 3, "seed": 42, "sample_sizes": [10],
          "gaussian": {"rule": "alvarez"}, "sinkhorn": {"epsilon": 0.01}})"));
  CHECK(cfg.family == Family::gaussian);
  CHECK(cfg.replicates == 3);
  CHECK(cfg.seed == 42);
  CHECK(cfg.sample_sizes == std::vector<std::size_t>{10});
  CHECK(cfg.gaussian.rule == GaussianBarycenterRule::alvarez_esteban);
  CHECK(cfg.sinkhorn.epsilon == 0.01);
  CHECK(cfg.total == ContaminationConfig{}.total);

  const auto again = io::contamination_config_from_json(io::to_json(cfg));
  CHECK(io::to_json(again) == io::to_json(cfg));

  CHECK_THROWS_AS(io::contamination_config_from_json(json::parse(R"({"family": "cauchy"})")),
                  InvalidInput);
  CHECK_THROWS_AS(io::contamination_config_from_json(json::parse(R"({"replicates": "many"})")),
                  InvalidInput);
  CHECK_THROWS_AS(io::contamination_config_from_json(json::parse("[]")), InvalidInput);

  const auto path = scratch("bad.json");
  io::write_text_file(path.string(), "{\"seed\": ");
  CHECK_THROWS_AS(io::parse_json_file(path.string()), ParseError);
}
