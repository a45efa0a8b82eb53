#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace smolu {

enum class KernelForm { Classical, ProductEnvelope, Custom };

std::string to_string(KernelForm form);
KernelForm kernel_form_from_string(const std::string& name);

// Homogeneous coagulation kernel with power-law envelope
//   c1 (x^-a y^b + x^b y^-a) <= K(x,y) <= c2 (x^-a y^b + x^b y^-a).
struct KernelSpec {
  KernelForm form = KernelForm::Classical;
  double a = 1.0 / 3.0;
  double b = 1.0 / 3.0;
  double gamma = 0.0;
  double c1 = 1.0;
  double c2 = 2.0;
  // ProductEnvelope prefactor C in C (x^-a y^b + x^b y^-a).
  double prefactor = 1.0;
  // Only used for Custom. Must be symmetric and homogeneous of degree b - a.
  std::function<double(double, double)> custom;
  // Optional derivative bound |d_x K| <= c3 (y^-a + y^b) on compact x ranges.
  std::optional<double> c3;

  static KernelSpec classical();
  static KernelSpec product_envelope(double a, double b, double C = 1.0);
  static KernelSpec make_custom(std::function<double(double, double)> fn, double a, double b,
                                double c1, double c2);

  // Throws DomainError unless a > 0, b < 1, gamma == b - a, 0 < c1 <= c2.
  void validate() const;
};

struct RegularizationParams {
  double epsilon = 0.0;
  double lambda = 0.0;
  double transition_width_ratio = 0.5;

  void validate() const;
};

double eval(const KernelSpec& spec, double x, double y);
// K(x + eps, y + eps).
double eval_shifted(const KernelSpec& spec, const RegularizationParams& reg, double x, double y);
// K_eps(x,y) chi(x) chi(y); equals eval_shifted when lambda == 0.
double eval_cutoff(const KernelSpec& spec, const RegularizationParams& reg, double x, double y);

// Smooth bump: 1 on [lambda, 1/lambda], 0 outside [(1-w) lambda, (1+w)/lambda].
double cutoff_factor(const RegularizationParams& reg, double x);
// Smallest x with chi(x) == 0 above the plateau; +inf without cutoff.
double cutoff_upper_zero(const RegularizationParams& reg);
// Largest x with chi(x) == 0 below the plateau; 0 without cutoff.
double cutoff_lower_zero(const RegularizationParams& reg);

struct EnvelopeBounds {
  double lower;
  double upper;
};
EnvelopeBounds envelope(const KernelSpec& spec, double x, double y);

// coef * x^p * y^q. Summing the terms gives K exactly for Classical and
// ProductEnvelope and the c2 upper envelope for Custom kernels.
struct PowerTerm {
  double coef;
  double p;
  double q;
};
std::vector<PowerTerm> power_terms(const KernelSpec& spec);

struct KernelValidation {
  double max_symmetry_error = 0.0;
  double max_homogeneity_error = 0.0;
  double min_envelope_margin = 0.0;  // negative when the envelope is violated
  bool symmetric = false;
  bool homogeneous = false;
  bool within_envelope = false;
  double c3_estimate = 0.0;  // sup |d_x K| / (y^-a + y^b) over the sampled box
};

// Samples a points x points log grid over [lo, hi]^2.
KernelValidation validate_structure(const KernelSpec& spec, int points = 20, double lo = 1e-4,
                                    double hi = 1e4, double homogeneity_tol = 1e-12);

// Finite-difference estimate of sup_{x in [d,D], y} |d_x K(x,y)| / (y^-a + y^b).
double estimate_c3(const KernelSpec& spec, double d, double D, int points = 40);

}  // namespace smolu
