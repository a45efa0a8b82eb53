#include <doctest.h>

#include <cmath>
#include <limits>

#include "smolu/flux.hpp"
#include "smolu/stationary.hpp"

using namespace smolu;

namespace {

const RegularizationParams kZeroKernel{0.0, 10.0, 0.5};

// I[h](x) = int_0^x h(y) int_{x-y}^inf K(y,z)/z h(z) dz dy by nested Simpson in log
// coordinates: log y on (0, x/2], log(x-y) on [x/2, x), log z inside.
double brute_flux(const std::function<double(double, double)>& K, const std::function<double(double)>& h, double x,
                  double z_max) {
  auto simpson = [](auto f, double lo, double hi, int m) {
    const double d = (hi - lo) / m;
    double s = f(lo) + f(hi);
    for (int i = 1; i < m; ++i) s += f(lo + i * d) * (i % 2 ? 4.0 : 2.0);
    return s * d / 3.0;
  };
  auto inner = [&](double y) {
    return simpson([&](double v) { const double z = std::exp(v); return z * K(y, z) * h(z); },
                   std::log(x - y), std::log(z_max), 2000);
  };
  const double near = simpson([&](double v) { const double y = std::exp(v); return y * h(y) * inner(y); },
                              std::log(1e-12 * x), std::log(0.5 * x), 2000);
  const double far = simpson([&](double w) { const double y = x - std::exp(w); return (x - y) * h(y) * inner(y); },
                             std::log(1e-12 * x), std::log(0.5 * x), 2000);
  return near + far;
}

}  // namespace

TEST_SUITE("stationary") {
  TEST_CASE("transport balance without coagulation") {
    const double rho = 0.5;
    const Profile p = Profile::power_law(LogGrid(1e-4, 1e4, 257), rho, 1 - rho);
    const auto r = stationary_residual_nodes(p, kZeroKernel, KernelSpec::classical());
    CHECK(max_abs(r) <= 1e-6);
    for (double R : {3e-4, 0.5, 77.0}) CHECK(std::abs(stationary_residual(p, kZeroKernel, KernelSpec::classical(), R)) <= 1e-6);
    const Profile z = Profile::power_law(LogGrid(1e-4, 1e4, 257), rho, 0.0);
    CHECK(max_abs(stationary_residual_nodes(z, {0.05, 0.01, 0.5}, KernelSpec::classical())) == 0.0);
  }

  TEST_CASE("flux against a brute-force double integral") {
    const double rho = 0.5, eps = 0.1;
    const KernelSpec k = KernelSpec::product_envelope(1.0 / 3.0, 1.0 / 3.0, 1.0);
    const LogGrid g(1e-4, 1e4, 513);
    const Profile p = Profile::power_law(g, rho, 1 - rho);
    // the profile vanishes above x_max when its tail amplitude is zero
    const Profile cut = p.with_tail_amplitude(0.0);
    auto h = [&](double x) { return x <= g.x_max() ? (1 - rho) * std::pow(x, -rho) : 0.0; };
    auto K = [&](double y, double z) { return eval(k, y + eps, z + eps) / z; };
    const double oracle = brute_flux(K, h, 1.0, g.x_max());
    CHECK(coagulation_flux(cut, {eps, 0.0, 0.5}, k, 1.0) == doctest::Approx(oracle).epsilon(1e-2));
    CHECK(coagulation_flux(p.with_tail_amplitude(0.0).scaled(0.0), {eps, 0.0, 0.5}, k, 1.0) == 0.0);
  }

  TEST_CASE("direct solve without coagulation") {
    const LogGrid g(1e-4, 1e4, 257);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    StationaryOptions opt;
    opt.tol = 1e-6;
    const StationaryResult r = solve_stationary_direct(params, kZeroKernel, KernelSpec::classical(), g, opt);
    CHECK(r.residual <= 1e-6);
    CHECK(r.iterations <= 2);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(r.profile.density(i) == doctest::Approx(0.5 * std::pow(g.x(i), -0.5)).epsilon(1e-9));
  }

  TEST_CASE("evolve solve with infinite tolerance takes one step") {
    const LogGrid g(1e-3, 1e3, 97);
    StationaryOptions opt;
    opt.tol = std::numeric_limits<double>::infinity();
    opt.check_every = 1;
    const StationaryResult r = solve_stationary_evolve(SelfSimilarParams::from_rho(0.5, 0.0), {0.05, 0.01, 0.5},
                                                       KernelSpec::classical(), g, {1.0, 0.5}, opt);
    CHECK(r.iterations == 1);
  }

  TEST_CASE("single-entry sweep matches the plain solve") {
    const LogGrid g(1e-4, 1e4, 257);
    const auto params = SelfSimilarParams::from_rho(0.5, 0.0);
    StationaryOptions opt;
    opt.tol = 1e-6;
    const SweepResult s = epsilon_sweep(params, KernelSpec::classical(), g, {0.0}, {10.0}, {1.0, 0.5}, opt, 0.5,
                                        SolveMode::Direct);
    const StationaryResult r = solve_stationary(SolveMode::Direct, params, kZeroKernel, KernelSpec::classical(), g,
                                                {1.0, 0.5}, opt);
    REQUIRE(s.entries.size() == 1);
    CHECK(s.entries[0].result.profile.density() == r.profile.density());
    CHECK(s.cauchy.empty());
  }

  TEST_CASE("weighted l1") {
    const Profile p = Profile::power_law(LogGrid(1e-2, 1e3, 200), 0.5, 0.5);
    CHECK(weighted_l1(p, p) == 0.0);
    CHECK(weighted_l1(p.scaled(1.1), p) == doctest::Approx(0.1).epsilon(1e-6));
  }

  TEST_CASE("scale covariance of the residual") {
    // with eps = lambda = 0 and gamma = 0, h(x/s) on the grid s x has the same residual
    const double s = 8.0;
    auto h = [](double x) { return 0.5 * std::pow(x, -0.5) * std::exp(-0.1 / x); };
    const Profile p = Profile::from_function(LogGrid(1e-3, 1e3, 193), 0.5, h, 0.5);
    const Profile q = Profile::from_function(LogGrid(s * 1e-3, s * 1e3, 193), 0.5, [&](double x) { return h(x / s); },
                                             0.5 * std::pow(s, 0.5));
    const KernelSpec k = KernelSpec::classical();
    const auto r1 = stationary_residual_nodes(p, {}, k);
    const auto r2 = stationary_residual_nodes(q, {}, k);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r2[i] == doctest::Approx(r1[i]).epsilon(1e-6).scale(1.0));
  }
}
