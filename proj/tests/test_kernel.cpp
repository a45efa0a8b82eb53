#include <doctest.h>

#include <cmath>

#include "smolu/error.hpp"
#include "smolu/kernel.hpp"

using namespace smolu;

TEST_SUITE("kernel") {
  TEST_CASE("classical values") {
    const KernelSpec k = KernelSpec::classical();
    CHECK(eval(k, 1, 1) == doctest::Approx(4.0).epsilon(1e-15));
    // (2+1)(1/2+1)
    CHECK(eval(k, 8, 1) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(eval(k, 8, 1) == doctest::Approx(eval(k, 1, 8)).epsilon(1e-15));
  }

  TEST_CASE("product envelope values") {
    const KernelSpec k = KernelSpec::product_envelope(1.0 / 3.0, 1.0 / 3.0, 1.0);
    CHECK(eval(k, 1, 1) == doctest::Approx(2.0));
    const double x = 0.3, y = 7.0;
    CHECK(eval(k, x, y) == doctest::Approx(std::pow(x, -1.0 / 3) * std::cbrt(y) + std::cbrt(x) * std::pow(y, -1.0 / 3)));
  }

  TEST_CASE("nonpositive arguments are rejected") {
    const KernelSpec k = KernelSpec::classical();
    CHECK_THROWS_AS(eval(k, 0, 1), DomainError);
    CHECK_THROWS_AS(eval(k, 1, -2), DomainError);
    CHECK_THROWS_AS(envelope(k, -1, 1), DomainError);
    CHECK_THROWS_AS(eval_shifted(k, RegularizationParams{0.0, 0.0, 0.5}, 0.0, 1.0), DomainError);
  }

  TEST_CASE("shift") {
    const KernelSpec k = KernelSpec::classical();
    CHECK(eval_shifted(k, {1.0, 0.0, 0.5}, 0, 0) == doctest::Approx(4.0));
    const KernelSpec p = KernelSpec::product_envelope(1.0 / 3.0, 1.0 / 3.0, 1.0);
    CHECK(eval_shifted(p, {0.5, 0.0, 0.5}, 0.5, 0.5) == doctest::Approx(2.0));
    CHECK(eval_shifted(k, {0.0, 0.0, 0.5}, 2, 3) == eval(k, 2, 3));
  }

  TEST_CASE("cutoff regions") {
    const KernelSpec k = KernelSpec::classical();
    const RegularizationParams reg{0.05, 0.1, 0.5};
    CHECK(eval_cutoff(k, reg, 1, 1) == eval_shifted(k, reg, 1, 1));
    CHECK(eval_cutoff(k, reg, 0.04, 1) == 0.0);
    CHECK(eval_cutoff(k, reg, 1, 20) == 0.0);
    CHECK(cutoff_upper_zero(reg) == doctest::Approx(15.0));
    // sandwich on a sweep through both ramps
    for (double x = 0.01; x < 30; x *= 1.07)
      for (double y : {0.06, 0.5, 3.0, 12.0}) {
        const double c = eval_cutoff(k, reg, x, y);
        CHECK(c >= 0.0);
        CHECK(c <= eval_shifted(k, reg, x, y) * (1 + 1e-15));
      }
  }

  TEST_CASE("cutoff is smooth and monotone on the lower ramp") {
    const RegularizationParams reg{0.0, 0.1, 0.5};
    double prev = 0.0;
    for (double x = 0.05; x <= 0.1; x += 0.0005) {
      const double c = cutoff_factor(reg, x);
      CHECK(c >= prev - 1e-15);
      prev = c;
    }
    CHECK(cutoff_factor(reg, 0.1) == 1.0);
    CHECK(cutoff_factor(reg, 0.05) == 0.0);
  }

  TEST_CASE("envelope") {
    const KernelSpec k = KernelSpec::classical();
    const EnvelopeBounds e = envelope(k, 1, 1);
    CHECK(e.lower == doctest::Approx(2.0));
    CHECK(e.upper == doctest::Approx(4.0));
    // x^-1/3 y^1/3 + x^1/3 y^-1/3 at (8,1) is 0.5 + 2
    const EnvelopeBounds e8 = envelope(k, 8, 1);
    CHECK(e8.lower == doctest::Approx(2.5));
    CHECK(e8.upper == doctest::Approx(5.0));
    CHECK(eval(k, 8, 1) >= e8.lower);
    CHECK(eval(k, 8, 1) <= e8.upper);
    const KernelSpec p = KernelSpec::product_envelope(0.2, 0.4, 1.0);
    const EnvelopeBounds ep = envelope(p, 3, 0.7);
    CHECK(ep.lower == doctest::Approx(eval(p, 3, 0.7)));
    CHECK(ep.upper == doctest::Approx(eval(p, 3, 0.7)));
  }

  TEST_CASE("structural validation on a 20x20 log grid") {
    for (const KernelSpec& k : {KernelSpec::classical(), KernelSpec::product_envelope(0.5, -0.2, 2.0)}) {
      const KernelValidation v = validate_structure(k);
      CHECK(v.symmetric);
      CHECK(v.homogeneous);
      CHECK(v.within_envelope);
      CHECK(v.max_homogeneity_error <= 1e-12);
      CHECK(v.c3_estimate > 0.0);
    }
  }

  TEST_CASE("parameter validation") {
    KernelSpec k = KernelSpec::classical();
    k.gamma = 0.1;
    CHECK_THROWS_AS(k.validate(), DomainError);
    CHECK_THROWS_AS(KernelSpec::product_envelope(0.3, 1.2, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(KernelSpec::product_envelope(-0.1, 0.2, 1.0).validate(), DomainError);
    CHECK_THROWS_AS((RegularizationParams{-1.0, 0.0, 0.5}.validate()), DomainError);
    CHECK_THROWS_AS((RegularizationParams{0.0, 0.1, 0.7}.validate()), DomainError);
  }

  TEST_CASE("custom kernel is checked against its envelope") {
    const KernelSpec k = KernelSpec::make_custom(
        [](double x, double y) { return 1.5 * (std::pow(x, -0.25) * std::pow(y, 0.25) + std::pow(x, 0.25) * std::pow(y, -0.25)); },
        0.25, 0.25, 1.0, 2.0);
    const KernelValidation v = validate_structure(k);
    CHECK(v.within_envelope);
    CHECK(v.symmetric);
  }
}
