#include "smolu/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smolu/error.hpp"

namespace smolu {

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // an exact fit of constant data counts as perfect
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

LEps compute_l_eps(const Profile& p, double epsilon, double a, double b) {
  if (!(a > 0.0) || !(b < 1.0)) throw DomainError("compute_l_eps needs a > 0 and b < 1");
  if (epsilon < 0.0) throw DomainError("compute_l_eps needs epsilon >= 0");
  LEps r;
  r.mu = p.weighted_integral([&](double x) { return std::pow(x + epsilon, -a); }, 0.0, 1.0, 16);
  r.lambda = p.weighted_integral([&](double x) { return std::pow(x + epsilon, b); }, 0.0, 1.0, 16);
  r.L = std::max(std::pow(r.lambda, 1.0 / (1.0 + a)), std::pow(r.mu, 1.0 / (1.0 - b)));
  return r;
}

QEpsCurve compute_q_eps(const Profile& p, const KernelSpec& kernel, double epsilon, double L,
                        const std::vector<double>& X_list) {
  if (!(L > 0.0)) throw DomainError("compute_q_eps needs L > 0");
  const double a = kernel.a, b = kernel.b;
  const LEps m = compute_l_eps(p, epsilon, a, b);
  QEpsCurve c;
  c.L = L;
  for (double X : X_list) {
    if (!(X > 0.0)) throw DomainError("compute_q_eps needs positive X");
    QEpsSample s;
    s.X = X;
    s.Q = p.weighted_integral(
              [&](double y) { return eval(kernel, y + epsilon, L * X + epsilon); }, 0.0, 1.0, 16) /
          L;
    const double Xe = X + epsilon / L;
    const double form =
        m.mu * std::pow(L, b - 1.0) * std::pow(Xe, b) + m.lambda * std::pow(L, -1.0 - a) * std::pow(Xe, -a);
    s.lower = kernel.c1 * form;
    s.upper = kernel.c2 * form;
    c.samples.push_back(s);
  }
  return c;
}

TailFit fit_tail_exponent(const Profile& p, double decades, double min_x) {
  const auto& g = p.grid();
  if (std::log10(g.x_max() / g.x_min()) < decades)
    throw InsufficientRangeError("grid covers fewer than " + format_double(decades) + " decades");
  const double lo = std::max(g.x_max() * std::pow(10.0, -decades) * (1.0 - 1e-12), min_x);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.x(i) < lo || !(p.density(i) > 0.0)) continue;
    lx.push_back(std::log(g.x(i)));
    ly.push_back(std::log(p.density(i)));
  }
  if (lx.size() < 3) throw InsufficientRangeError("fewer than 3 positive tail nodes");
  const LineFit f = least_squares(lx, ly);
  TailFit t;
  t.rho_hat = -f.slope;
  t.amp_hat = std::exp(f.intercept);
  t.r2 = f.r2;
  t.points = lx.size();
  return t;
}

OriginFit fit_origin_decay(const Profile& p, double epsilon, double a, const OriginFitOptions& opt) {
  const auto& g = p.grid();
  const auto& F = p.cumulative_nodes();
  const double rho = p.rho();
  OriginFit o;
  o.lo = opt.lo > 0.0 ? opt.lo : 10.0 * g.x_min();
  o.hi = opt.hi;
  if (!(o.hi > o.lo)) throw InsufficientRangeError("empty origin fit window");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double D = g.x(i);
    if (D < o.lo * (1.0 - 1e-12) || D > o.hi * (1.0 + 1e-12) || !(F[i] > 0.0)) continue;
    xs.push_back(-std::pow(D + epsilon, -a));
    ys.push_back(std::log(F[i]) - (1.0 - rho) * std::log(D));
  }
  if (xs.size() < 3) throw InsufficientRangeError("fewer than 3 nodes in the origin fit window");
  const LineFit f = least_squares(xs, ys);
  o.c_hat = f.slope;
  o.C_hat = std::exp(f.intercept);
  o.r2 = f.r2;
  o.points = xs.size();
  return o;
}

RatioRange cumulative_ratio_range(const Profile& p, double decades) {
  const auto& g = p.grid();
  const auto& F = p.cumulative_nodes();
  const double lo = g.x_max() * std::pow(10.0, -decades) * (1.0 - 1e-12);
  RatioRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.x(i) < lo) continue;
    const double q = F[i] / std::pow(g.x(i), 1.0 - p.rho());
    r.min = std::min(r.min, q);
    r.max = std::max(r.max, q);
  }
  return r;
}

}  // namespace smolu
