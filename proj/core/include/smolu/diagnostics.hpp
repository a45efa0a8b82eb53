#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"

namespace smolu {

struct LEps {
  double mu = 0.0;      // int_0^1 h (x+eps)^-a
  double lambda = 0.0;  // int_0^1 h (x+eps)^b
  double L = 0.0;       // max(lambda^{1/(1+a)}, mu^{1/(1-b)})
};

LEps compute_l_eps(const Profile& p, double epsilon, double a, double b);

struct QEpsSample {
  double X = 0.0;
  double Q = 0.0;
  double lower = 0.0;  // c1 (mu L^{b-1} (X+eps/L)^b + lambda L^{-1-a} (X+eps/L)^-a)
  double upper = 0.0;  // same with c2
};

struct QEpsCurve {
  double L = 0.0;
  std::vector<QEpsSample> samples;
};

// Q(X) = int_0^1 h(y)/L K(y + eps, L X + eps) dy with the envelope bounds.
QEpsCurve compute_q_eps(const Profile& p, const KernelSpec& kernel, double epsilon, double L,
                        const std::vector<double>& X_list);

struct TailFit {
  double rho_hat = 0.0;
  double amp_hat = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

// Least squares of log h against log x over the top `decades` of the grid,
// skipping nodes below min_x.
TailFit fit_tail_exponent(const Profile& p, double decades = 2.0, double min_x = 0.0);

struct OriginFitOptions {
  double lo = 0.0;  // 0 means 10 x_min
  double hi = 0.5;
};

struct OriginFit {
  double c_hat = 0.0;
  double C_hat = 0.0;
  double r2 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;
};

// Least squares of log F(D) - (1-rho) log D against -(D+eps)^-a on grid nodes
// in [lo, hi]: slope c_hat, intercept log C_hat.
OriginFit fit_origin_decay(const Profile& p, double epsilon, double a,
                           const OriginFitOptions& opt = {});

struct RatioRange {
  double min = 0.0;
  double max = 0.0;
};

// Range of F(R)/R^{1-rho} over grid nodes in the top `decades`.
RatioRange cumulative_ratio_range(const Profile& p, double decades = 1.0);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace smolu
