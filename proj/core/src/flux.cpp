#include "smolu/flux.hpp"

#include <algorithm>
#include <cmath>

#include "detail/operators.hpp"
#include "smolu/error.hpp"
#include "smolu/parallel.hpp"
#include "smolu/quadrature.hpp"

namespace smolu {

namespace {
constexpr double kSnap = 1e-9;

double loglin_interp(double a, double b, double w) {
  if (w < kSnap) return a;
  if (w > 1.0 - kSnap) return b;
  if (a > 0.0 && b > 0.0) return std::exp(std::log(a) + w * (std::log(b) - std::log(a)));
  return a + w * (b - a);
}
}  // namespace

struct FluxEvaluator::Tables {
  Profile fine;
  std::vector<double> C;  // C[k][j] = int_{z_j}^inf K(y_k,z) h(z) dz/z
  double F_low = 0.0;
};

FluxEvaluator::FluxEvaluator(const LogGrid& grid, const KernelSpec& kernel,
                             const RegularizationParams& reg, double rho, std::size_t oversample)
    : grid_(grid),
      fine_(grid.refined(std::max<std::size_t>(oversample, 1))),
      kernel_(kernel),
      reg_(reg),
      rho_(rho),
      factor_(std::max<std::size_t>(oversample, 1)) {
  check_admissible(rho, kernel);
  const std::size_t n = fine_.size();
  k_.assign(n * n, 0.0);
  tail_.assign(n, 0.0);
  parallel_for(n, [&](std::size_t k) {
    const double y = fine_.x(k);
    for (std::size_t j = 0; j < n; ++j) k_[k * n + j] = eval_cutoff(kernel_, reg_, y, fine_.x(j));
    tail_[k] = detail::tail_loss_factor(kernel_, reg_, rho_, y, fine_.x_max(), 1.0);
  });
}

FluxEvaluator::Tables FluxEvaluator::build(const Profile& h) const {
  if (!(h.grid() == grid_)) throw DomainError("profile grid differs from the evaluator grid");
  const std::size_t n = fine_.size();
  Tables tab;
  std::vector<double> hf(n);
  for (std::size_t j = 0; j < n; ++j) hf[j] = h.value(fine_.x(j));
  tab.fine = Profile(fine_, std::move(hf), h.rho(), h.tail_amplitude());
  tab.F_low = tab.fine.lower_mass();
  tab.C.assign(n * n, 0.0);
  const double L = fine_.du();
  const auto& hv = tab.fine.density();
  const double c = h.tail_amplitude();
  parallel_for(n, [&](std::size_t k) {
    const double* K = &k_[k * n];
    double* C = &tab.C[k * n];
    double acc = c * tail_[k];
    C[n - 1] = acc;
    for (std::size_t j = n - 1; j-- > 0;) {
      acc += quad::loglin_cell(L, K[j] * hv[j], K[j + 1] * hv[j + 1]);
      C[j] = acc;
    }
  });
  return tab;
}

double FluxEvaluator::flux_with(const Tables& tab, double x) const {
  const std::size_t n = fine_.size();
  const double L = fine_.du();
  const Profile& P = tab.fine;
  const auto& hv = P.density();
  const double xmin = fine_.x_min();

  // T(y_k, s) for s >= x_min
  auto T_row = [&](std::size_t k, double s) {
    const double* C = &tab.C[k * n];
    if (s <= xmin) return C[0];
    if (s >= fine_.x_max()) {
      const double c = P.tail_amplitude();
      return c > 0.0 ? c * detail::tail_loss_factor(kernel_, reg_, rho_, fine_.x(k), s, 1.0) : 0.0;
    }
    const double p = fine_.position(s);
    const auto j = static_cast<std::size_t>(std::clamp(std::floor(p), 0.0, static_cast<double>(n - 2)));
    const double w = std::clamp(p - static_cast<double>(j), 0.0, 1.0);
    const double* K = &k_[k * n];
    return C[j + 1] + quad::loglin_partial(L, K[j] * hv[j], K[j + 1] * hv[j + 1], w, 1.0);
  };
  // C at fractional row position and node column
  auto C_rows = [&](double yp, std::size_t col) {
    const auto r = static_cast<std::size_t>(std::clamp(std::floor(yp), 0.0, static_cast<double>(n - 2)));
    const double w = std::clamp(yp - static_cast<double>(r), 0.0, 1.0);
    return loglin_interp(tab.C[r * n + col], tab.C[(r + 1) * n + col], w);
  };

  const double half = 0.5 * x;
  const double pm = fine_.position(half);
  const double px = fine_.position(x);
  const double hx = P.value(x);
  const double k_low = eval_cutoff(kernel_, reg_, x, xmin);
  if (pm < -kSnap) {
    const double Fh = cumulative(P, half);
    return Fh * T_row(0, x) + hx * (half * C_rows(px, 0) + k_low * Fh);
  }
  auto km = static_cast<std::size_t>(std::floor(pm + kSnap));
  km = std::min(km, n - 1);
  double frm = pm - static_cast<double>(km);
  if (frm < kSnap) frm = 0.0;

  const double hm = P.value(half);
  double Tm = T_row(km, half);
  if (frm > 0.0 && km + 1 < n) Tm = loglin_interp(Tm, T_row(km + 1, half), frm);
  const double gm = hm * Tm * half;

  // outer variable y on [0, x/2]
  double P1 = 0.0, P2 = 0.0;
  double g1_prev = 0.0, g2_prev = 0.0;
  for (std::size_t k = 0; k <= km; ++k) {
    const double y = fine_.x(k);
    const double g1 = hv[k] * T_row(k, x - y) * y;
    const double yp = fine_.position(x - y);
    const double g2 = P.value(x - y) * C_rows(yp, k) * y;
    if (k > 0) {
      P1 += quad::loglin_cell(L, g1_prev, g1);
      P2 += quad::loglin_cell(L, g2_prev, g2);
    }
    g1_prev = g1;
    g2_prev = g2;
  }
  if (frm > 0.0) {
    P1 += quad::loglin_cell(frm * L, g1_prev, gm);
    P2 += quad::loglin_cell(frm * L, g2_prev, gm);
  }
  P1 += tab.F_low * T_row(0, x);
  P2 += hx * (xmin * C_rows(px, 0) + k_low * tab.F_low);
  return P1 + P2;
}

std::vector<double> FluxEvaluator::flux_nodes(const Profile& h) const {
  const Tables tab = build(h);
  std::vector<double> I(grid_.size());
  parallel_for(I.size(), [&](std::size_t i) { I[i] = flux_with(tab, grid_.x(i)); });
  return I;
}

double FluxEvaluator::flux_at(const Profile& h, double x) const {
  if (!(x > 0.0)) throw DomainError("flux needs x > 0");
  return flux_with(build(h), x);
}

namespace {
double relative_residual(double rho, double x, double hx, double F, double I) {
  const double den = x * hx + (1.0 - rho) * F;
  if (!(den > 0.0)) return 0.0;
  return ((1.0 - rho) * F + I - x * hx) / den;
}
}  // namespace

std::vector<double> FluxEvaluator::residual_nodes(const Profile& h) const {
  const auto I = flux_nodes(h);
  const auto& F = h.cumulative_nodes();
  std::vector<double> r(I.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = relative_residual(rho_, grid_.x(i), h.density(i), F[i], I[i]);
  return r;
}

double FluxEvaluator::residual_at(const Profile& h, double R) const {
  if (!(R >= grid_.x_min() * (1 - 1e-12)) || !(R <= grid_.x_max() * (1 + 1e-12)))
    throw DomainError("residual point outside the grid range");
  return relative_residual(rho_, R, h.value(R), cumulative(h, R), flux_at(h, R));
}

double coagulation_flux(const Profile& p, const RegularizationParams& reg, const KernelSpec& kernel,
                        double x) {
  if (!(x > 0.0)) return 0.0;
  return FluxEvaluator(p.grid(), kernel, reg, p.rho(), 4).flux_at(p, x);
}

std::vector<double> coagulation_flux_nodes(const Profile& p, const RegularizationParams& reg,
                                           const KernelSpec& kernel) {
  return FluxEvaluator(p.grid(), kernel, reg, p.rho(), 4).flux_nodes(p);
}

}  // namespace smolu
