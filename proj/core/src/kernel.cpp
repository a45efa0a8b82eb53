#include "smolu/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smolu/error.hpp"

namespace smolu {

namespace {

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double f0 = std::exp(-1.0 / s);
  const double f1 = std::exp(-1.0 / (1.0 - s));
  return f0 / (f0 + f1);
}

double envelope_form(const KernelSpec& spec, double x, double y) {
  return std::pow(x, -spec.a) * std::pow(y, spec.b) + std::pow(x, spec.b) * std::pow(y, -spec.a);
}

}  // namespace

std::string to_string(KernelForm form) {
  switch (form) {
    case KernelForm::Classical: return "Classical";
    case KernelForm::ProductEnvelope: return "ProductEnvelope";
    case KernelForm::Custom: return "Custom";
  }
  return "Custom";
}

KernelForm kernel_form_from_string(const std::string& name) {
  if (name == "Classical") return KernelForm::Classical;
  if (name == "ProductEnvelope") return KernelForm::ProductEnvelope;
  if (name == "Custom") return KernelForm::Custom;
  throw DomainError("unknown kernel form '" + name + "' (expected Classical, ProductEnvelope or Custom)");
}

KernelSpec KernelSpec::classical() { return KernelSpec{}; }

KernelSpec KernelSpec::product_envelope(double a, double b, double C) {
  KernelSpec s;
  s.form = KernelForm::ProductEnvelope;
  s.a = a;
  s.b = b;
  s.gamma = b - a;
  s.c1 = C;
  s.c2 = C;
  s.prefactor = C;
  return s;
}

KernelSpec KernelSpec::make_custom(std::function<double(double, double)> fn, double a, double b,
                                   double c1, double c2) {
  KernelSpec s;
  s.form = KernelForm::Custom;
  s.a = a;
  s.b = b;
  s.gamma = b - a;
  s.c1 = c1;
  s.c2 = c2;
  s.custom = std::move(fn);
  return s;
}

void KernelSpec::validate() const {
  if (!(a > 0.0)) throw DomainError("kernel exponent a must be positive");
  if (!(b < 1.0)) throw DomainError("kernel exponent b must be < 1");
  if (gamma != b - a) throw DomainError("kernel homogeneity gamma must equal b - a");
  if (!(c1 > 0.0) || !(c1 <= c2)) throw DomainError("kernel envelope constants need 0 < c1 <= c2");
  if (form == KernelForm::Classical && (a != 1.0 / 3.0 || b != 1.0 / 3.0))
    throw DomainError("Classical kernel has a = b = 1/3");
  if (form == KernelForm::ProductEnvelope && !(prefactor > 0.0))
    throw DomainError("ProductEnvelope prefactor must be positive");
  if (form == KernelForm::Custom && !custom) throw DomainError("Custom kernel needs a callable");
}

void RegularizationParams::validate() const {
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (!(transition_width_ratio > 0.0 && transition_width_ratio <= 0.5))
    throw DomainError("transition_width_ratio must lie in (0, 1/2]");
}

double eval(const KernelSpec& spec, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("kernel arguments must be positive");
  switch (spec.form) {
    case KernelForm::Classical: {
      const double p = std::cbrt(x);
      const double q = std::cbrt(y);
      return (p + q) * (1.0 / p + 1.0 / q);
    }
    case KernelForm::ProductEnvelope:
      return spec.prefactor * envelope_form(spec, x, y);
    case KernelForm::Custom:
      return spec.custom(x, y);
  }
  return 0.0;
}

double eval_shifted(const KernelSpec& spec, const RegularizationParams& reg, double x, double y) {
  if (x < 0.0 || y < 0.0) throw DomainError("kernel arguments must be nonnegative");
  if (reg.epsilon == 0.0 && (x == 0.0 || y == 0.0))
    throw DomainError("zero argument needs epsilon > 0");
  return eval(spec, x + reg.epsilon, y + reg.epsilon);
}

double cutoff_factor(const RegularizationParams& reg, double x) {
  if (reg.lambda == 0.0) return 1.0;
  const double w = reg.transition_width_ratio;
  const double lam = reg.lambda;
  const double lo = smooth_step((x - (1.0 - w) * lam) / (w * lam));
  if (lo == 0.0) return 0.0;
  const double hi = smooth_step(((1.0 + w) / lam - x) / (w / lam));
  return lo * hi;
}

double cutoff_upper_zero(const RegularizationParams& reg) {
  if (reg.lambda == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 + reg.transition_width_ratio) / reg.lambda;
}

double cutoff_lower_zero(const RegularizationParams& reg) {
  if (reg.lambda == 0.0) return 0.0;
  return (1.0 - reg.transition_width_ratio) * reg.lambda;
}

double eval_cutoff(const KernelSpec& spec, const RegularizationParams& reg, double x, double y) {
  if (x < 0.0 || y < 0.0) throw DomainError("kernel arguments must be nonnegative");
  const double chi = cutoff_factor(reg, x) * cutoff_factor(reg, y);
  if (chi == 0.0) return 0.0;
  return chi * eval_shifted(spec, reg, x, y);
}

EnvelopeBounds envelope(const KernelSpec& spec, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("envelope arguments must be positive");
  const double f = envelope_form(spec, x, y);
  return {spec.c1 * f, spec.c2 * f};
}

std::vector<PowerTerm> power_terms(const KernelSpec& spec) {
  switch (spec.form) {
    case KernelForm::Classical:
      return {{2.0, 0.0, 0.0}, {1.0, 1.0 / 3.0, -1.0 / 3.0}, {1.0, -1.0 / 3.0, 1.0 / 3.0}};
    case KernelForm::ProductEnvelope:
      return {{spec.prefactor, -spec.a, spec.b}, {spec.prefactor, spec.b, -spec.a}};
    case KernelForm::Custom:
      return {{spec.c2, -spec.a, spec.b}, {spec.c2, spec.b, -spec.a}};
  }
  return {};
}

KernelValidation validate_structure(const KernelSpec& spec, int points, double lo, double hi,
                                    double homogeneity_tol) {
  KernelValidation out;
  out.min_envelope_margin = std::numeric_limits<double>::infinity();
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  const double scales[] = {1e-3, 0.37, 2.0, 1e3};
  for (double x : g) {
    for (double y : g) {
      const double k = eval(spec, x, y);
      out.max_symmetry_error = std::max(out.max_symmetry_error, std::abs(k - eval(spec, y, x)));
      for (double s : scales) {
        const double ks = eval(spec, s * x, s * y);
        const double expect = std::pow(s, spec.gamma) * k;
        out.max_homogeneity_error =
            std::max(out.max_homogeneity_error, std::abs(ks - expect) / std::abs(expect));
      }
      const auto env = envelope(spec, x, y);
      // relative margin of the tighter side
      const double margin = std::min(k - env.lower, env.upper - k) / env.upper;
      out.min_envelope_margin = std::min(out.min_envelope_margin, margin);
    }
  }
  out.symmetric = out.max_symmetry_error == 0.0;
  out.homogeneous = out.max_homogeneity_error <= homogeneity_tol;
  out.within_envelope = out.min_envelope_margin >= -1e-14;
  out.c3_estimate = estimate_c3(spec, 0.5, 2.0);
  return out;
}

double estimate_c3(const KernelSpec& spec, double d, double D, int points) {
  if (!(d > 0.0) || !(D > d)) throw DomainError("estimate_c3 needs 0 < d < D");
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = d * std::pow(D / d, static_cast<double>(i) / (points - 1));
    const double hx = 1e-6 * x;
    for (int j = 0; j < points; ++j) {
      const double y = 1e-3 * std::pow(1e6, static_cast<double>(j) / (points - 1));
      const double dk = (eval(spec, x + hx, y) - eval(spec, x - hx, y)) / (2.0 * hx);
      best = std::max(best, std::abs(dk) / (std::pow(y, -spec.a) + std::pow(y, spec.b)));
    }
  }
  return best;
}

}  // namespace smolu
