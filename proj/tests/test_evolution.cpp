#include <doctest.h>

#include <cmath>

#include "smolu/error.hpp"
#include "smolu/evolution.hpp"

using namespace smolu;

namespace {

// lower ramp vanishes below 5, upper ramp above 0.15: the kernel is zero everywhere
const RegularizationParams kZeroKernel{0.0, 10.0, 0.5};

double h0_smooth(double x) { return 0.5 * std::pow(x, -0.5) / (1.0 + 1.0 / x) * (1.0 + 0.2 * std::sin(std::log(x))); }

double gaussian(double x, double mu, double sigma) {
  return std::exp(-0.5 * (x - mu) * (x - mu) / (sigma * sigma)) / (sigma * std::sqrt(2.0 * M_PI));
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("loss rate without coagulation is -rho") {
    const LogGrid g(1e-3, 1e3, 129);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    const auto s = make_state(Profile::from_function(g, 0.5, h0_smooth, 0.5), params, kZeroKernel,
                              KernelSpec::classical());
    for (double X : {1e-3, 0.3, 2.0, 700.0}) CHECK(op_a(s, X) == doctest::Approx(-0.5));
    const auto z = make_state(Profile::power_law(g, 0.5, 0.0), params, {0.1, 0.0, 0.5}, KernelSpec::classical());
    CHECK(op_a(z, 1.0) == doctest::Approx(-0.5));
    CHECK(op_q(z, 1.0) == 0.0);
    CHECK(op_q(s, 1.0) == 0.0);
  }

  TEST_CASE("loss rate of a concentrated unit mass") {
    // H ~ unit mass at Y = 1, eps = 1: A(1) -> K(2,2) - rho = 2 - rho for a = b = 1/3
    const KernelSpec k = KernelSpec::product_envelope(1.0 / 3.0, 1.0 / 3.0, 1.0);
    const double sigma = 0.02;
    auto H = [&](double x) { return gaussian(x, 1.0, sigma); };
    const int m = 20000;
    const double lo = 1.0 - 10 * sigma, d = 20 * sigma / m;
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double Y = lo + i * d;
      sum += eval(k, 2.0, Y + 1.0) / Y * H(Y) * (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    const double oracle = sum * d / 3.0 - 0.5;
    CHECK(oracle == doctest::Approx(2.0 - 0.5).epsilon(1e-3));
    const LogGrid g(0.5, 2.0, 4001);
    const auto s = make_state(Profile::from_function(g, 0.5, H, 0.0), SelfSimilarParams::from_rho(0.5, 0.0),
                              {1.0, 0.0, 0.5}, k);
    // log-linear interpolation of the bump costs about (du / sigma)^2 / 8 = 4e-5
    CHECK(op_a(s, 1.0) == doctest::Approx(oracle).epsilon(1e-4));
  }

  TEST_CASE("gain term against a dense brute-force convolution") {
    const double eps = 1.0, X = 2.0;
    const KernelSpec k = KernelSpec::classical();
    auto H = [](double x) { return gaussian(x, 1.0, 0.1); };
    // Q(X) = int_0^X K(Y+eps, X-Y+eps) / (X-Y) H(X-Y) H(Y) dY, composite Simpson
    const int m = 200000;
    const double lo = 1e-9, hi = X - 1e-9, d = (hi - lo) / m;
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double Y = lo + i * d;
      const double f = eval(k, Y + eps, X - Y + eps) / (X - Y) * H(X - Y) * H(Y);
      sum += f * (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    const double oracle = sum * d / 3.0;
    const LogGrid g(1e-3, 1e3, 2001);
    const auto s = make_state(Profile::from_function(g, 0.5, H, 0.0), SelfSimilarParams::from_rho(0.5, 0.0),
                              {eps, 0.0, 0.5}, k);
    CHECK(oracle > 0.0);
    CHECK(op_q(s, X) == doctest::Approx(oracle).epsilon(1e-3));
  }

  TEST_CASE("mild step without coagulation is pure growth") {
    const LogGrid g(1e-3, 1e3, 129);
    const auto params = SelfSimilarParams::from_rho(0.6, 0.0);
    const auto s = make_state(Profile::from_function(g, 0.6, h0_smooth, 0.4), params, kZeroKernel,
                              KernelSpec::classical());
    const double dt = 0.01;
    const auto next = step_mild(s, dt);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(next.profile.density(i) == doctest::Approx(std::exp(0.6 * dt) * s.profile.density(i)).epsilon(1e-12));
    const auto z = step_mild(make_state(Profile::power_law(g, 0.6, 0.0), params, {0.05, 0.01, 0.5}, KernelSpec::classical()), dt);
    for (double v : z.profile.density()) CHECK(v == 0.0);
  }

  TEST_CASE("mild step is first-order consistent") {
    const LogGrid g(1e-3, 1e3, 97);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    const auto s = make_state(Profile::from_function(g, 0.5, h0_smooth, 0.5), params, {0.05, 0.01, 0.5},
                              KernelSpec::classical());
    auto change = [&](double dt) {
      const auto n = step_mild(s, dt);
      double m = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        m = std::max(m, std::pow(g.x(i), 0.5) * std::abs(n.profile.density(i) - s.profile.density(i)));
      return m;
    };
    const double r = change(2e-3) / change(1e-3);
    CHECK(r == doctest::Approx(2.0).epsilon(0.02));
  }

  TEST_CASE("evolve without coagulation follows the characteristics") {
    // du = log 2 / 8, so T = log 2 in 8 subintervals maps nodes onto nodes
    const int k = 8;
    const LogGrid g(std::pow(2.0, -10), std::pow(2.0, 10), 20 * k + 1);
    const double rho = 0.5;
    const auto s = make_state(Profile::from_function(g, rho, h0_smooth, 0.5), SelfSimilarParams::from_rho(rho, 0.0),
                              kZeroKernel, KernelSpec::classical());
    const auto out = evolve(s, std::log(2.0), k);
    CHECK(out.frame_time == doctest::Approx(0.0));
    for (std::size_t i = 0; i + k < g.size(); ++i)
      CHECK(out.profile.density(i) == doctest::Approx(std::pow(2.0, rho) * h0_smooth(g.x(i + k))).epsilon(1e-6));
  }

  TEST_CASE("zero horizon and zero data") {
    const LogGrid g(1e-3, 1e3, 65);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    const auto s = make_state(Profile::from_function(g, 0.5, h0_smooth, 0.5), params, {0.05, 0.01, 0.5},
                              KernelSpec::classical());
    const auto same = evolve(s, 0.0, 4);
    CHECK(same.profile.density() == s.profile.density());
    CHECK(same.t == s.t);

    const auto z = make_state(Profile::power_law(g, 0.5, 0.0), params, {0.05, 0.01, 0.5}, KernelSpec::classical());
    const auto r = picard_solve(z, 0.5);
    REQUIRE(!r.distances.empty());
    CHECK(r.distances.front() == 0.0);
    for (double v : r.state.profile.density()) CHECK(v == 0.0);
  }

  TEST_CASE("picard iteration on a short horizon contracts") {
    const LogGrid g(1e-3, 1e3, 97);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    const auto s = make_state(Profile::from_function(g, 0.5, h0_smooth, 0.5), params, {0.05, 0.01, 0.5},
                              KernelSpec::classical());
    const auto r = picard_solve(s, 0.05);
    REQUIRE(r.distances.size() >= 2);
    for (std::size_t i = 1; i < r.distances.size(); ++i) CHECK(r.distances[i] < r.distances[i - 1]);
    CHECK(r.distances.back() <= PicardOptions{}.tol);
    CHECK(r.state.t == doctest::Approx(0.05));
  }

  TEST_CASE("stiff kernel on a long horizon reports no contraction") {
    const LogGrid g(1e-3, 1e3, 97);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    const KernelSpec k = KernelSpec::product_envelope(1.0 / 3.0, 1.0 / 3.0, 30.0);
    const auto s = make_state(seed_profile(params, {1.0, 0.5}, g), params, {0.05, 0.01, 0.5}, k);
    CHECK_THROWS_AS(picard_solve(s, 5.0), NoContractionError);
    CHECK_NOTHROW(picard_solve(s, 0.05));
  }

  TEST_CASE("one step keeps the seed inside the invariant set") {
    const LogGrid g(1e-3, 1e3, 129);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    const auto s = make_state(seed_profile(params, {1.0, 0.5}, g), params, {0.05, 0.01, 0.5}, KernelSpec::classical());
    REQUIRE(satisfies_f1(s.profile));
    const auto out = evolve(s, 0.05, 1);
    CHECK(satisfies_f1(out.profile, 1e-3));
  }
}
