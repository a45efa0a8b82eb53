#include <doctest.h>

#include <cmath>

#include "smolu/diagnostics.hpp"
#include "smolu/error.hpp"

using namespace smolu;

TEST_SUITE("diagnostics") {
  TEST_CASE("L_eps for constant density") {
    const Profile one = Profile::from_function(LogGrid(1e-8, 10.0, 801), 0.5, [](double) { return 1.0; }, 0.0);
    const LEps l = compute_l_eps(one, 0.0, 1.0 / 3.0, 1.0 / 3.0);
    CHECK(l.mu == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(l.lambda == doctest::Approx(0.75).epsilon(1e-4));
    CHECK(l.L == doctest::Approx(std::pow(1.5, 1.5)).epsilon(1e-4));

    const Profile two = one.scaled(2.0);
    const LEps l2 = compute_l_eps(two, 0.0, 1.0 / 3.0, 1.0 / 3.0);
    CHECK(l2.mu == doctest::Approx(2.0 * l.mu));
    CHECK(l2.lambda == doctest::Approx(2.0 * l.lambda));
    CHECK(l2.L == doctest::Approx(std::max(std::pow(l2.lambda, 0.75), std::pow(l2.mu, 1.5))));

    const LEps z = compute_l_eps(Profile::power_law(LogGrid(1e-3, 10.0, 64), 0.5, 0.0), 0.05, 1.0 / 3.0, 1.0 / 3.0);
    CHECK(z.mu == 0.0);
    CHECK(z.lambda == 0.0);
    CHECK(z.L == 0.0);
  }

  TEST_CASE("Q_eps for constant density") {
    const Profile one = Profile::from_function(LogGrid(1e-8, 10.0, 801), 0.5, [](double) { return 1.0; }, 0.0);
    const KernelSpec k = KernelSpec::product_envelope(1.0 / 3.0, 1.0 / 3.0, 1.0);
    // int_0^1 y^-1/3 + y^1/3 dy = 3/2 + 3/4
    const QEpsCurve c = compute_q_eps(one, k, 0.0, 1.0, {1.0});
    REQUIRE(c.samples.size() == 1);
    CHECK(c.samples[0].Q == doctest::Approx(2.25).epsilon(1e-4));

    const QEpsCurve w = compute_q_eps(one, KernelSpec::classical(), 0.05, 1.3, {0.01, 0.1, 1.0, 10.0, 100.0});
    for (const auto& s : w.samples) {
      CHECK(s.Q <= s.upper * (1 + 1e-12));
      CHECK(s.Q >= s.lower * (1 - 1e-12));
    }
    const QEpsCurve z = compute_q_eps(Profile::power_law(LogGrid(1e-3, 10.0, 64), 0.5, 0.0), k, 0.05, 1.0, {1.0, 2.0});
    for (const auto& s : z.samples) CHECK(s.Q == 0.0);
  }

  TEST_CASE("tail fit") {
    const Profile p = Profile::power_law(LogGrid(1e-4, 1e4, 512), 0.5, 0.5);
    const TailFit f = fit_tail_exponent(p);
    CHECK(f.rho_hat == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(f.amp_hat == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(f.r2 == doctest::Approx(1.0));

    const Profile q = Profile::from_function(LogGrid(1e-4, 1e4, 512), 0.3,
                                             [](double x) { return std::pow(x, -0.3) * (1 + 0.01 * std::sin(std::log(x))); }, 1.0);
    CHECK(fit_tail_exponent(q).rho_hat == doctest::Approx(0.3).epsilon(0.01 / 0.3));

    const Profile narrow = Profile::power_law(LogGrid(1.0, 5.0, 32), 0.5, 0.5);
    CHECK_THROWS_AS(fit_tail_exponent(narrow, 2.0), InsufficientRangeError);
  }

  TEST_CASE("origin decay of a synthetic profile") {
    // F(D) = D^(1-rho) exp(-(D+eps)^-a), h = F'
    const double rho = 0.5, a = 1.0 / 3.0, eps = 0.05;
    auto F = [&](double D) { return std::pow(D, 1 - rho) * std::exp(-std::pow(D + eps, -a)); };
    auto h = [&](double D) { return F(D) * ((1 - rho) / D + a * std::pow(D + eps, -a - 1)); };
    const Profile p = Profile::from_function(LogGrid(1e-7, 1e3, 2001), rho, h, 0.0);
    const OriginFit f = fit_origin_decay(p, eps, a);
    CHECK(f.c_hat == doctest::Approx(1.0).epsilon(0.02));
    CHECK(f.r2 > 0.99);
  }

  TEST_CASE("cumulative ratio of the power law") {
    const Profile p = Profile::power_law(LogGrid(1e-4, 1e4, 512), 0.5, 0.5);
    const RatioRange r = cumulative_ratio_range(p);
    CHECK(r.min == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.max == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("least squares") {
    const LineFit f = least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
  }
}
