#include <doctest.h>

#include <string>

#include "config.hpp"
#include "smolu/error.hpp"

using namespace smolu;
using namespace smolu::tools;

namespace {

// Message of the ConfigError thrown by parse_config, or "" when none is thrown.
std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("full solve config") {
    const RunConfig c = parse_config(R"({
  "kernel": {"form": "classical"},
  "regularization": {"epsilon": 0.05, "lambda": 0.01},
  "params": {"rho": 0.5, "grid": {"x_min": 1e-3, "x_max": 1e3, "n": 300},
             "invariant_set": {"r0": 2.0, "delta": 0.25}},
  "solver": {"mode": "evolve", "tol": 1e-4, "T_max": 50},
  "output": {"dir": "somewhere", "dump_every": 3}
})");
    CHECK(c.kernel.form == KernelForm::Classical);
    CHECK(c.reg.epsilon == 0.05);
    CHECK(c.reg.lambda == 0.01);
    CHECK(c.grid.n == 300);
    CHECK(c.invariant.r0 == 2.0);
    CHECK(c.solver.mode == SolveMode::Evolve);
    CHECK(c.solver.T_max == 50.0);
    CHECK(c.output.dir == "somewhere");
    CHECK(c.output.dump_every == 3);
    CHECK(c.stationary_options().tol == 1e-4);
  }

  TEST_CASE("defaults") {
    const RunConfig c = parse_config("{}");
    CHECK(c.rho == 0.5);
    CHECK(c.grid.n == 512);
    CHECK(c.solver.mode == SolveMode::Direct);
    CHECK(!c.dual.has_value());
    CHECK(c.verify_only.empty());
  }

  TEST_CASE("product envelope kernel") {
    const RunConfig c = parse_config(R"({"kernel": {"form": "product_envelope", "a": 0.2, "b": 0.4, "C": 2},
                                         "params": {"rho": 0.6}})");
    CHECK(c.kernel.form == KernelForm::ProductEnvelope);
    CHECK(c.kernel.gamma == doctest::Approx(0.2));
    CHECK(c.params().beta == doctest::Approx(1.0 / 0.4));
  }

  TEST_CASE("dual config") {
    const RunConfig c = parse_config(R"({"dual": {"kind": "jump",
      "kernel_terms": [{"type": "power_law", "prefactor": 2, "omega": 0.3}],
      "init": {"type": "step", "A": 1, "kappa": 0.05, "n": 2}, "times": [0.5]}})");
    REQUIRE(c.dual.has_value());
    CHECK(c.dual->kind == DualConfig::Kind::Jump);
    CHECK(c.dual->step);
    CHECK(c.dual->n_mollify == 2);
    REQUIRE(c.dual->kernel.terms.size() == 1);
    CHECK(std::get<PowerLawTerm>(c.dual->kernel.terms[0]).omega == 0.3);
  }

  TEST_CASE("errors name the file, line and key") {
    CHECK(config_error("{\n  \"params\": {\n    \"rho\": 1.5\n  }\n}").rfind("t.json:3: params.rho:", 0) == 0);
    CHECK(config_error("{\n\"solver\": {\"mode\": \"sideways\"}}").rfind("t.json:2: solver.mode:", 0) == 0);
    CHECK(config_error("{\"kernel\": {\"form\": \"classical\", \"colour\": 1}}").find("kernel.colour") != std::string::npos);
    CHECK(config_error("{\"params\": {\"grid\": {\"n\": -4}}}").find("params.grid.n") != std::string::npos);
    CHECK(config_error("{\"params\": {\"grid\": {\"x_min\": 10, \"x_max\": 1}}}").find("params.grid") != std::string::npos);
    CHECK(config_error("{\"verify\": {\"only\": [14]}}").find("verify.only") != std::string::npos);
    CHECK(!config_error("{\"kernel\": {\"form\": \"custom\"}}").empty());
    CHECK(!config_error("{\"kernel\": {\"epsilon\": 0.1}, \"regularization\": {\"epsilon\": 0.1}}").empty());
    CHECK(!config_error("{ not json").empty());
  }

  TEST_CASE("admissible interval in the message") {
    const std::string m = config_error("{\"params\": {\"rho\": 0.2}}");
    CHECK(m.find("(max(b,0), 1)") != std::string::npos);
  }

  TEST_CASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/x.json"), ConfigError); }
}
