#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "smolu/error.hpp"
#include "smolu/measure.hpp"

using namespace smolu;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

LogGrid wide_grid() { return LogGrid(1e-6, 1e6, 1201); }

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("log grid") {
    const LogGrid g(1e-2, 1e2, 17);
    CHECK(g.size() == 17);
    CHECK(g.x(0) == 1e-2);
    CHECK(g.x(16) == 1e2);
    CHECK(g.x(8) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.position(10.0) == doctest::Approx(12.0));
    const LogGrid r = g.refined(4);
    CHECK(r.size() == 65);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(r.x(4 * i) == doctest::Approx(g.x(i)).epsilon(1e-14));
  }

  TEST_CASE("cumulative of the power law") {
    const double rho = 0.5;
    const Profile p = Profile::power_law(wide_grid(), rho, 1.0 - rho);
    // F(R) = R^(1-rho)
    CHECK(cumulative(p, 4.0) == doctest::Approx(2.0).epsilon(1e-4));
    for (double R : {1e-8, 3e-5, 0.77, 12.0, 5e5, 1e9})
      CHECK(cumulative(p, R) == doctest::Approx(std::sqrt(R)).epsilon(1e-4));
    CHECK(cumulative(p, 0.0) == 0.0);
    const Profile z = Profile::power_law(wide_grid(), rho, 0.0);
    CHECK(cumulative(z, 4.0) == 0.0);
    CHECK(cumulative(z, 1e9) == 0.0);
  }

  TEST_CASE("cumulative is monotone") {
    const Profile p = Profile::from_function(LogGrid(1e-3, 1e3, 200), 0.6,
                                             [](double x) { return 0.4 * std::pow(x, -0.6) * (1 + 0.5 * std::sin(x)); }, 0.4);
    double prev = 0.0;
    for (double R = 1e-4; R < 1e4; R *= 1.013) {
      const double F = cumulative(p, R);
      CHECK(F >= prev);
      prev = F;
    }
  }

  TEST_CASE("norm_rho") {
    const double rho = 0.5;
    CHECK(norm_rho(Profile::power_law(wide_grid(), rho, 0.5)) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(norm_rho(Profile::power_law(wide_grid(), rho, 1.0)) == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(norm_rho(Profile::power_law(wide_grid(), rho, 0.0)) == 0.0);
  }

  TEST_CASE("moments against closed forms") {
    const Profile p = Profile::power_law(wide_grid(), 0.5, 0.5);
    // 0.5 int_0^4 x^-0.5 dx
    CHECK(moment(p, 0.0, 0.0, 4.0) == doctest::Approx(2.0).epsilon(1e-3));
    // 0.5 int_1^inf x^-1.5 dx
    CHECK(moment(p, -1.0, 1.0, kInf) == doctest::Approx(1.0).epsilon(1e-3));
    // 0.5 int_0.01^100 x^0.25 dx
    const double oracle = 0.5 * (std::pow(100.0, 1.25) - std::pow(0.01, 1.25)) / 1.25;
    CHECK(moment(p, 0.75, 0.01, 100.0) == doctest::Approx(oracle).epsilon(1e-6));
    const Profile z = Profile::power_law(wide_grid(), 0.5, 0.0);
    CHECK(moment(z, 0.3, 0.0, 10.0) == 0.0);
    CHECK(moment(z, -2.0, 1.0, kInf) == 0.0);
    CHECK_THROWS_AS(moment(p, 0.0, 1.0, kInf), DivergenceError);
    CHECK_THROWS_AS(moment(p, 0.0, 2.0, 1.0), DomainError);
  }

  TEST_CASE("moment bounds") {
    const double rho = 0.5;
    const Profile p = Profile::power_law(wide_grid(), rho, 1.0 - rho);
    const MomentBoundReport r0 = check_moment_bounds(p, {0.0}, {0.1, 1.0, 10.0});
    CHECK(r0.all_pass);
    // int_0^D h = D^(1-rho) = |h| D^(1-rho): the bound is attained
    for (const auto& e : r0.entries) CHECK(e.ratio == doctest::Approx(1.0).epsilon(1e-6));

    // alpha = -1/4, D = 1: integral 0.5 * 4 = 2, dyadic constant 2^a / (1 - 2^(rho-1-a))
    const MomentBoundReport r1 = check_moment_bounds(p, {-0.25}, {1.0});
    const double C = std::pow(2.0, 0.25) / (1.0 - std::pow(2.0, -0.25));
    REQUIRE(r1.entries.size() == 1);
    CHECK(r1.all_pass);
    CHECK(r1.entries[0].integral == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(r1.entries[0].ratio == doctest::Approx(2.0 / C).epsilon(2e-3));

    const MomentBoundReport rt = check_moment_bounds(p, {-1.0, -2.0}, {1.0, 100.0});
    CHECK(rt.all_pass);

    const MomentBoundReport rz = check_moment_bounds(Profile::power_law(wide_grid(), rho, 0.0), {-0.25, 0.0, 0.3}, {1.0});
    CHECK(rz.all_pass);
    for (const auto& e : rz.entries) CHECK(e.ratio == 0.0);
  }

  TEST_CASE("invariant set membership") {
    const double rho = 0.5;
    const Profile p = Profile::power_law(wide_grid(), rho, 1.0 - rho);
    CHECK(satisfies_f1(p));
    CHECK(satisfies_f2(p, {1.0, 0.5}));
    CHECK(satisfies_f2(p, {4.0, 0.9}));
    CHECK_FALSE(satisfies_f1(Profile::power_law(wide_grid(), rho, 2.0 * (1.0 - rho))));

    // truncated power law: F(r) = r^0.5 - 1 meets the lower bound with equality at delta = 0.5
    const Profile s = seed_profile(SelfSimilarParams::from_rho(rho, 0.0), {1.0, 0.5}, wide_grid());
    CHECK(satisfies_f1(s));
    CHECK(satisfies_f2(s, {1.0, 0.5}));
    CHECK_FALSE(satisfies_f2(s, {1.0, 0.8}));
  }

  TEST_CASE("seed profile") {
    const Profile s = seed_profile(SelfSimilarParams::from_rho(0.5, 0.0), {1.0, 0.5}, LogGrid(1e-4, 1e4, 512));
    CHECK(cumulative(s, 2.0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-4));
    CHECK(norm_rho(s) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(cumulative(s, 0.5) == 0.0);
    // R0 off the grid: the cell below R0 carries the mass of [R0, next node]
    const Profile t = seed_profile(SelfSimilarParams::from_rho(0.5, 0.0), {1.7, 0.5}, LogGrid(1e-4, 1e4, 512));
    CHECK(cumulative(t, 8.0) == doctest::Approx(std::sqrt(8.0) - std::sqrt(1.7)).epsilon(1e-9));
  }

  TEST_CASE("self-similar exponents") {
    const SelfSimilarParams s = SelfSimilarParams::from_rho(0.5, 0.0);
    CHECK(s.beta == doctest::Approx(2.0));
    CHECK(s.alpha == doctest::Approx(3.0));
    CHECK_THROWS_AS(SelfSimilarParams::from_rho(0.2, 0.3), AdmissibilityError);
  }

  TEST_CASE("admissibility") {
    const KernelSpec k = KernelSpec::classical();
    CHECK_NOTHROW(check_admissible(0.5, k));
    CHECK_THROWS_AS(check_admissible(1.0, k), AdmissibilityError);
    CHECK_THROWS_AS(check_admissible(0.3, k), AdmissibilityError);
    CHECK_NOTHROW(check_admissible(0.05, KernelSpec::product_envelope(0.2, -0.1, 1.0)));
  }

  TEST_CASE("csv round trip") {
    const Profile p = Profile::from_function(LogGrid(1e-3, 1e3, 64), 0.5,
                                             [](double x) { return 0.5 * std::pow(x, -0.5) / (1 + 1 / x); }, 0.5);
    std::istringstream in(profile_csv(p));
    const Profile q = read_profile_csv(in, 0.5);
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(q.density(i) == p.density(i));
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    std::istringstream bad("y,z\n1,2\n");
    CHECK_THROWS_AS(read_profile_csv(bad, 0.5), DomainError);
  }
}
