#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "otmedian/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(OTMEDIAN_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Run r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name, const std::string& content = {}) {
  const fs::path dir = fs::temp_directory_path() / "otmedian_test_cli";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  if (!content.empty()) otmedian::io::write_text_file(p.string(), content);
  return p;
}

}  // namespace

TEST_CASE("cli: help exits 0 and lists every flag") {
  const Run r = run("--help");
  CHECK(r.code == 0);
  for (const char* flag : {"--family", "--input", "--config", "--out", "--seed", "--threads",
                           "--epsilon", "--max-iter", "--tol", "--rule"})
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
}

TEST_CASE("cli: Dirac distance") {
  const auto in = scratch("dirac.json", R"({"measures": [2, 5]})");
  const Run r = run("distance --family univariate --input " + in.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("3.0") != std::string::npos);
  CHECK(json::parse(r.out).at("distance").get<double>() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("cli: median of identical covariances") {
  const auto in = scratch("covs.json",
                          R"({"measures": [[[2, 0.3], [0.3, 1]], [[2, 0.3], [0.3, 1]], [[2, 0.3], [0.3, 1]]]})");
  const auto out = scratch("median.json");
  fs::remove(out);
  const Run r = run("median --family gaussian --input " + in.string() + " --out " + out.string());
  CHECK(r.code == 0);
  const json result = json::parse(otmedian::io::read_text_file(out.string()));
  const auto m = result.at("median").get<std::vector<std::vector<double>>>();
  CHECK(m[0][0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(m[0][1] == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(m[1][1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cli: sweep output does not depend on --threads") {
  const auto cfg = scratch("sweep.json", R"({"family": "univariate_gamma", "total": 20,
      "contamination_counts": [0, 4], "sample_sizes": [30], "replicates": 2,
      "quantile_grid": 200})");
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  CHECK(run("sweep --config " + cfg.string() + " --seed 42 --threads 1 --out " + a.string()).code == 0);
  CHECK(run("sweep --config " + cfg.string() + " --seed 42 --threads 3 --out " + b.string()).code == 0);
  const std::string ta = otmedian::io::read_text_file(a.string());
  CHECK(ta == otmedian::io::read_text_file(b.string()));
  CHECK(ta.rfind("k,sample_size,replicate,error_median,error_barycenter\n", 0) == 0);
}

TEST_CASE("cli: exit codes") {
  const auto dirac = scratch("dirac2.json", R"({"measures": [2, 5]})");
  CHECK(run("distance --input " + dirac.string()).code == 1);        // no family
  CHECK(run("frobnicate").code == 1);
  CHECK(run("distance --family nope --input x").code == 1);
  CHECK(run("distance --family gaussian --input " + scratch("missing.json").string()).code == 3);
  CHECK(run("distance --family gaussian --input " + dirac.string()).code == 3);
  const auto broken = scratch("broken.json", "{\"measures\": [");
  CHECK(run("median --family univariate --input " + broken.string()).code == 3);
  const auto covs = scratch("two.json", R"({"measures": [[[1, 0], [0, 1]], [[9, 0], [0, 1]]]})");
  CHECK(run("barycenter --family gaussian --max-iter 1 --tol 1e-300 --input " + covs.string()).code == 2);
}
