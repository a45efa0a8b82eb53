#include <doctest.h>

#include <cmath>
#include <limits>

#include "smolu/error.hpp"
#include "smolu/report.hpp"

using namespace smolu;

TEST_SUITE("report") {
  TEST_CASE("json round trip keeps every double") {
    RunReport r;
    r.version = library_version();
    r.started = utc_timestamp();
    r.finished = r.started;
    r.params = {"Classical", 1.0 / 3.0, 1.0 / 3.0, 1.0, 2.0, 0.5, 1e-4, 1e4, 512, 0.05, 0.01, "direct", 1e-3};
    r.solve = {"direct", 17, 0.0, true, 6.71e-4};
    r.residual_R = {1e-4, 0.1, 3.0};
    r.residuals = {1.0 / 7.0, -2e-5, 0.1 + 0.2};
    r.tail_fit.rho_hat = 0.49999999999;
    r.origin_fit.c_hat = std::numeric_limits<double>::quiet_NaN();
    r.l_eps = {1.1, 0.7, std::pow(1.1, 1.5)};
    r.recursion.A = {10.0, 100.0};
    r.recursion.margins = {0.3, std::numeric_limits<double>::infinity()};

    const std::string text = to_json(r);
    CHECK(text.find("NaN") == std::string::npos);
    const RunReport q = report_from_json(text);
    CHECK(q.schema == "report_v1");
    CHECK(q.params.a == r.params.a);
    CHECK(q.params.n == 512);
    CHECK(q.solve.method == "direct");
    CHECK(q.residuals == r.residuals);
    CHECK(q.tail_fit.rho_hat == r.tail_fit.rho_hat);
    CHECK(std::isnan(q.origin_fit.c_hat));
    CHECK(q.l_eps.L == r.l_eps.L);
    REQUIRE(q.recursion.margins.size() == 2);
    CHECK(q.recursion.margins[0] == 0.3);
    CHECK(to_json(q) == text);
  }

  TEST_CASE("malformed report") {
    CHECK_THROWS_AS(report_from_json("{\"schema\": 3"), ConfigError);
    CHECK_THROWS_AS(report_from_json("[]"), ConfigError);
  }

  TEST_CASE("timestamp format") {
    const std::string t = utc_timestamp();
    REQUIRE(t.size() == 20);
    CHECK(t[4] == '-');
    CHECK(t[10] == 'T');
    CHECK(t.back() == 'Z');
  }
}
