#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"

using namespace smolu::tools;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("smolu_test_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

const char* kZeroKernel = R"({
  "kernel": {"form": "classical"},
  "regularization": {"epsilon": 0.0, "lambda": 10.0},
  "params": {"rho": 0.5, "grid": {"x_min": 1e-4, "x_max": 1e4, "n": 256}},
  "solver": {"mode": "direct", "tol": 1e-6}
})";

}  // namespace

TEST_SUITE("commands") {
  TEST_CASE("solve writes a profile and a report") {
    const fs::path out = scratch("solve");
    std::ostringstream log;
    CHECK(cmd_solve(parse_config(kZeroKernel), {out.string(), std::nullopt}, log) == kExitOk);
    REQUIRE(fs::exists(out / "profile.csv"));
    const auto rep = read_json(out / "report.json");
    CHECK(rep["schema"] == "report_v1");
    CHECK(rep["solve"]["residual"].get<double>() <= 1e-6);
  }

  TEST_CASE("single-entry sweep writes a one-entry manifest") {
    const fs::path out = scratch("sweep");
    RunConfig c = parse_config(kZeroKernel);
    c.sweep.eps_list = {0.0};
    c.sweep.lambda_list = {10.0};
    std::ostringstream log;
    CHECK(cmd_sweep(c, {out.string(), std::nullopt}, log) == kExitOk);
    const auto manifest = read_json(out / "manifest.json");
    REQUIRE(manifest.is_array());
    CHECK(manifest.size() == 1);
    CHECK(fs::exists(out / manifest[0]["csv_path"].get<std::string>()));
  }

  TEST_CASE("non-convergence exits 2 with a partial profile") {
    const fs::path out = scratch("fail");
    RunConfig c = parse_config(R"({
  "regularization": {"epsilon": 0.05, "lambda": 0.01},
  "params": {"rho": 0.5, "grid": {"x_min": 1e-3, "x_max": 1e3, "n": 97}},
  "solver": {"mode": "evolve", "tol": 1e-9, "T_max": 0.1}
})");
    std::ostringstream log;
    CHECK(cmd_solve(c, {out.string(), std::nullopt}, log) == kExitFailed);
    CHECK(fs::exists(out / "profile_partial.csv"));
    CHECK(fs::exists(out / "failure.json"));
  }

  TEST_CASE("dual run reports mass drift") {
    const fs::path out = scratch("dual");
    const RunConfig c = parse_config(R"({"dual": {"kind": "jump",
      "kernel_terms": [{"type": "power_law", "prefactor": 1, "omega": 0.5}],
      "init": {"type": "delta", "A": 0, "kappa": 0.05, "n": 1}, "times": [0.1],
      "grid": {"n": 512, "span": 10}, "moment_Z": [1], "oracle_tol": 0.05}})");
    std::ostringstream log;
    CHECK(cmd_dual(c, {out.string(), std::nullopt}, log) == kExitOk);
    const auto rep = read_json(out / "dual_report.json");
    CHECK(rep["mass_drift"].get<double>() <= 1e-6);
    CHECK(log.str().find("mass_drift") != std::string::npos);
  }

  TEST_CASE("atomic write replaces the file") {
    const fs::path dir = scratch("atomic");
    fs::create_directories(dir);
    const std::string f = (dir / "a.txt").string();
    write_file_atomic(f, "one");
    write_file_atomic(f, "two");
    std::ifstream in(f);
    std::string s;
    in >> s;
    CHECK(s == "two");
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 1);
  }
}
