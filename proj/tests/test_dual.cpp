#include <doctest.h>

#include <cmath>

#include "smolu/dual.hpp"
#include "smolu/error.hpp"

using namespace smolu;

namespace {

JumpKernelSpec power_law(double P, double omega) { return JumpKernelSpec{{PowerLawTerm{P, omega}}}; }

// exp(-t P Gamma(1-omega)/omega Z^omega)
double laplace_oracle(double P, double omega, double t, double Z) {
  return std::exp(-t * P * std::tgamma(1.0 - omega) / omega * std::pow(Z, omega));
}

}  // namespace

TEST_SUITE("dual") {
  TEST_CASE("zero horizon returns the initial datum") {
    const JumpInit init = DeltaMollified{0.0, 0.05, 1};
    const DualGridOptions g{1024, 10.0};
    const DualSolution a = initial_solution(init, g);
    const DualSolution b = solve_jump(power_law(1.0, 0.5), init, 0.0, 0, g);
    CHECK(a.values == b.values);
    CHECK(b.t == 0.0);
    CHECK(a.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.grid.xi_max() == doctest::Approx(a.support_edge()).epsilon(1e-12));
  }

  TEST_CASE("mass, positivity and support") {
    const DualSolution s = solve_jump(power_law(1.0, 0.5), DeltaMollified{0.0, 0.05, 1}, 0.5, 100, {1024, 20.0});
    CHECK(s.mass_drift <= 1e-6);
    CHECK(std::abs(s.mass() - 1.0) <= 1e-6);
    for (double v : s.values) CHECK(v >= 0.0);
    REQUIRE(!s.edge_history.empty());
    for (std::size_t i = 1; i < s.edge_history.size(); ++i) CHECK(s.edge_history[i] <= s.edge_history[i - 1]);
  }

  TEST_CASE("laplace transform of the power-law semigroup") {
    const double kappa = 0.01;
    const DualGridOptions g{4096, 20.0};
    const DualSolution s = solve_jump(power_law(1.0, 0.5), DeltaMollified{0.0, kappa, 1}, 1.0, 200, g);
    // Gamma(1/2) = sqrt(pi), so the exponent at Z = 1 is 2 sqrt(pi)
    CHECK(laplace_oracle(1.0, 0.5, 1.0, 1.0) == doctest::Approx(std::exp(-2.0 * std::sqrt(M_PI))));
    for (double Z : {1.0, 4.0}) {
      const double oracle = laplace_oracle(1.0, 0.5, 1.0, Z) * mollifier_moment(kappa, 1, Z);
      CHECK(exponential_moment(s, Z) == doctest::Approx(oracle).epsilon(Z == 1.0 ? 0.01 : 0.02));
    }
    CHECK(mollifier_moment(1e-5, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("exponential moments decrease in time") {
    const JumpKernelSpec spec = power_law(1.0, 0.5);
    const JumpInit init = DeltaMollified{0.0, 0.02, 1};
    const DualGridOptions g{1024, 20.0};
    double prev = exponential_moment(initial_solution(init, g), 1.0);
    for (double t : {0.1, 0.2, 0.4}) {
      const double m = exponential_moment(solve_jump(spec, init, t, 40, g), 1.0);
      CHECK(m < prev);
      prev = m;
    }
  }

  TEST_CASE("sum of kernels equals the convolution of the semigroups") {
    const DualGridOptions g{2048, 20.0};
    const JumpInit init = DeltaMollified{0.0, 0.02, 1};
    const double T = 0.5;
    const DualSolution g1 = solve_jump(power_law(1.0, 0.3), init, T, 200, g);
    const DualSolution g2 = solve_jump(power_law(0.5, 0.7), init, T, 200, g);
    const DualSolution g12 = solve_jump(JumpKernelSpec{{PowerLawTerm{1.0, 0.3}, PowerLawTerm{0.5, 0.7}}},
                                        DeltaMollified{0.0, 0.02, 2}, T, 200, {2 * g.n - 1, 40.0});
    const DualSolution conv = convolve(g1, g2);
    CHECK(l1_distance(g12, conv, -10.0, 1.0) <= 1e-2);
    for (double D : {1.0, 2.0, 5.0})
      CHECK(tail_mass(conv, D) <= tail_mass(g1, D / 2) + tail_mass(g2, D / 2) + 1e-12);
  }

  TEST_CASE("tail mass") {
    const DualSolution s0 = initial_solution(DeltaMollified{0.0, 0.05, 1}, {1024, 10.0});
    CHECK(tail_mass(s0, 0.2) == 0.0);
    const DualSolution s = solve_jump(power_law(1.0, 0.5), DeltaMollified{0.0, 0.01, 1}, 1.0, 200, {4096, 120.0});
    // omega = 1/2 gives the Levy law with scale c = 2 pi: mass beyond D is erf(sqrt(pi / D))
    for (double D : {1.0, 10.0, 100.0})
      CHECK(tail_mass(s, D) == doctest::Approx(std::erf(std::sqrt(M_PI / D))).epsilon(0.01));
    const TailBoundReport rep = check_tail_bound(s, {20, 50, 100}, 0.9, 0.5);
    CHECK(rep.pass);
  }

  TEST_CASE("phi is a mollified step at time zero") {
    const double R = 10.0, kappa = 0.2;
    const DualSolution phi = build_phi(R, kappa, 0.05, {}, 1.0, 0.0, {0, 1024, 0.0});
    const auto v = phi.survival();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = phi.grid.xi(i);
      if (x <= R - 2 * kappa) CHECK(v[i] == doctest::Approx(1.0).epsilon(1e-9));
      if (x > R + 1e-12) CHECK(v[i] == 0.0);
    }
  }

  TEST_CASE("phi stays a nonincreasing function in [0,1]") {
    const DualSolution phi = build_phi(10.0, 0.2, 0.05, {}, 1.0, 0.1, {0, 1024, 0.0});
    const auto v = phi.survival();
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(v[i] >= -1e-12);
      CHECK(v[i] <= 1.0 + 1e-9);
      if (i > 0) CHECK(v[i] <= v[i - 1] + 1e-12);
    }
    CHECK(phi.support_edge() <= 10.0 + 1e-12);
  }

  TEST_CASE("decay exponent formula") {
    WParams w;
    // beta = b, omega1 = rho - b; the largest exponent is beta - sigma rho
    CHECK(theta_formula(w, 0.9) == doctest::Approx(0.9 * 0.5 - 1.0 / 3.0));
    CHECK(theta_formula(w, 0.1) == doctest::Approx(0.9 * 0.1));
  }

  TEST_CASE("recursion on the exact power law") {
    const double rho = 0.5;
    const auto rep = verify_recursion([&](double r) { return std::pow(r, 1.0 - rho); }, rho, 0.0, 0.9, 0.5, 0.25, 1.0);
    CHECK(rep.holds);
    CHECK(rep.entries.size() >= 2);
    CHECK(rep.C >= 0.0);
  }

  TEST_CASE("taylor estimate") {
    const TaylorCheckReport r = check_taylor_estimate();
    CHECK(r.tuples == 100);
    CHECK(r.holds);
  }

  TEST_CASE("cfl guard") {
    CHECK_THROWS_AS(solve_jump(power_law(1.0, 0.5), DeltaMollified{0.0, 0.01, 1}, 10.0, 1, {4096, 20.0}), CflError);
  }
}
