#include "smolu/dual.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <random>
#include <string>

#include "smolu/error.hpp"
#include "smolu/quadrature.hpp"

namespace smolu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// fftw planning is not thread safe
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

double bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

// int_{-1}^{1} e^{s x} bump(x) dx by Gauss-Legendre on 64 panels.
double bump_laplace(double s) {
  const auto rule = quad::gauss_legendre_unit(16);
  const int panels = 64;
  const double w = 2.0 / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = -1.0 + w * p;
    for (int k = 0; k < rule.size; ++k) {
      const double x = a + w * rule.nodes[k];
      total += rule.weights[k] * bump(x) * std::exp(s * x);
    }
  }
  return total * w;
}

double bump_mass() {
  static const double m = bump_laplace(0.0);
  return m;
}

// Samples of phi_kappa^{*n} on x_k = -n kappa + k hf (mass per sample, summing to 1).
std::vector<double> mollified_masses(double kappa, int n, double hf) {
  const int m = static_cast<int>(std::ceil(2.0 * kappa / hf));
  const double step = 2.0 * kappa / m;
  std::vector<double> one(static_cast<std::size_t>(m + 1));
  for (int k = 0; k <= m; ++k) one[k] = bump((-kappa + step * k) / kappa);
  std::vector<double> acc = one;
  for (int f = 1; f < n; ++f) {
    std::vector<double> next(acc.size() + one.size() - 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] == 0.0) continue;
      for (std::size_t j = 0; j < one.size(); ++j) next[i + j] += acc[i] * one[j];
    }
    acc = std::move(next);
  }
  double s = 0.0;
  for (double v : acc) s += v;
  for (double& v : acc) v /= s;
  return acc;
}

struct InitShape {
  double A;
  double kappa;
  int n;
  bool step;
};

InitShape shape_of(const JumpInit& init) {
  if (const auto* d = std::get_if<DeltaMollified>(&init)) return {d->A, d->kappa, d->n, false};
  const auto& s = std::get<StepMollified>(init);
  return {s.A, s.kappa, s.n, true};
}

void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope,
              double& intercept) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  intercept = (sy - slope * sx) / n;
}

// Rates of one kernel term on the lattice with spacing h: jumps of at least
// one cell are split linearly between neighbouring lattice lengths, shorter
// ones become a drift.
struct TermRates {
  std::vector<double> g;  // g[m] for m = 0..n-1, g[0] unused
  double total = 0.0;     // rate of jumps >= h, including those past the grid
  double drift = 0.0;     // int_0^h eta N(eta) d eta
};

// int_c^d N(eta) w(eta) d eta with Gauss-Legendre on [c, d].
template <class Rate, class Weight>
double gauss_piece(const Rate& rate, const Weight& weight, double c, double d) {
  const auto rule = quad::gauss_legendre_unit(16);
  double s = 0.0;
  for (int k = 0; k < rule.size; ++k) {
    const double e = c + (d - c) * rule.nodes[k];
    s += rule.weights[k] * rate(e) * weight(e);
  }
  return s * (d - c);
}

TermRates power_law_rates(const PowerLawTerm& t, double h, std::size_t n) {
  TermRates r;
  r.g.assign(n, 0.0);
  const double P = t.prefactor, w = t.omega;
  auto rate = [&](double e) { return P * std::pow(e, -1.0 - w); };
  for (std::size_t m = 1; m < n; ++m) {
    const double md = static_cast<double>(m);
    double v = gauss_piece(rate, [&](double e) { return md + 1.0 - e / h; }, md * h, (md + 1.0) * h);
    if (m >= 2)
      v += gauss_piece(rate, [&](double e) { return e / h - (md - 1.0); }, (md - 1.0) * h, md * h);
    r.g[m] = v;
  }
  r.total = P * std::pow(h, -w) / w;
  r.drift = P * std::pow(h, 1.0 - w) / (1.0 - w);
  return r;
}

TermRates profile_rates(const ProfileWeightedTerm& t, double h, std::size_t n) {
  TermRates r;
  r.g.assign(n, 0.0);
  const double L = t.L, eps = t.epsilon;
  auto factor = [&](double z) {
    double f = 0.0;
    if (t.lambda1 > 0.0) f += t.lambda1 * std::pow(z + eps, -t.a);
    if (t.lambda2 > 0.0) f += t.lambda2 * std::pow(z + eps, t.b);
    return f;
  };
  const double zcut = std::min(L * h, 1.0);
  r.drift = t.profile.weighted_integral([&](double z) { return factor(z); }, 0.0, zcut) / L;
  if (L * h >= 1.0) return r;
  // bins in eta = z / L, limited to z <= 1
  auto piece = [&](double ec, double ed, auto weight) {
    const double zc = L * ec, zd = std::min(L * ed, 1.0);
    if (zd <= zc) return 0.0;
    return t.profile.weighted_integral(
        [&](double z) { return factor(z) / z * weight(z / L); }, zc, zd);
  };
  const double eta_max = 1.0 / L;
  for (std::size_t m = 1; m < n; ++m) {
    const double md = static_cast<double>(m);
    if ((md - 1.0) * h >= eta_max) break;
    double v = piece(md * h, (md + 1.0) * h, [&](double e) { return md + 1.0 - e / h; });
    if (m >= 2) v += piece((md - 1.0) * h, md * h, [&](double e) { return e / h - (md - 1.0); });
    r.g[m] = v;
  }
  r.total = t.profile.weighted_integral([&](double z) { return factor(z) / z; }, zcut, 1.0);
  return r;
}

// ETDRK4 coefficients for a scalar linear part z = c dt (contour averages).
struct EtdCoefficients {
  double E, E2, Q, f1, f2, f3;
};

EtdCoefficients etd_coefficients(double c, double dt) {
  const int M = 32;
  const double z = c * dt;
  std::complex<double> q{}, a{}, b{}, d{};
  for (int k = 0; k < M; ++k) {
    const std::complex<double> w =
        z + std::exp(std::complex<double>(0.0, 2.0 * M_PI * (k + 0.5) / M));
    const auto ew = std::exp(w), ew2 = std::exp(w / 2.0);
    const auto w3 = w * w * w;
    q += (ew2 - 1.0) / w;
    a += (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3;
    b += (2.0 + w + ew * (w - 2.0)) / w3;
    d += (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3;
  }
  EtdCoefficients e;
  e.E = std::exp(z);
  e.E2 = std::exp(z / 2.0);
  e.Q = dt * q.real() / M;
  e.f1 = dt * a.real() / M;
  e.f2 = dt * b.real() / M;
  e.f3 = dt * d.real() / M;
  return e;
}

// Correlation corr_i = sum_m g_m f_{i+m} through zero-padded real FFTs.
class Correlator {
 public:
  Correlator(const std::vector<double>& g, std::size_t n) : n_(n), N_(2 * n) {
    in_ = fftw_alloc_real(N_);
    spec_ = fftw_alloc_complex(N_ / 2 + 1);
    kern_ = fftw_alloc_complex(N_ / 2 + 1);
    {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(N_), in_, spec_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(N_), spec_, in_, FFTW_ESTIMATE);
    }
    std::fill(in_, in_ + N_, 0.0);
    for (std::size_t m = 0; m < g.size() && m < n_; ++m) in_[m] = g[m];
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < N_ / 2 + 1; ++k) {
      kern_[k][0] = spec_[k][0];
      kern_[k][1] = spec_[k][1];
    }
  }
  ~Correlator() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(in_);
    fftw_free(spec_);
    fftw_free(kern_);
  }
  Correlator(const Correlator&) = delete;
  Correlator& operator=(const Correlator&) = delete;

  // out_i for i = 0..n-1; f is read reversed so the correlation is a convolution.
  void apply(const std::vector<double>& f, std::vector<double>& out) {
    std::fill(in_, in_ + N_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) in_[j] = f[n_ - 1 - j];
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < N_ / 2 + 1; ++k) {
      const double ar = spec_[k][0], ai = spec_[k][1];
      const double br = kern_[k][0], bi = kern_[k][1];
      spec_[k][0] = ar * br - ai * bi;
      spec_[k][1] = ar * bi + ai * br;
    }
    fftw_execute(bwd_);
    const double scale = 1.0 / static_cast<double>(N_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = in_[n_ - 1 - i] * scale;
  }

 private:
  std::size_t n_, N_;
  double* in_;
  fftw_complex* spec_;
  fftw_complex* kern_;
  fftw_plan fwd_, bwd_;
};

std::size_t last_positive(const std::vector<double>& f) {
  for (std::size_t i = f.size(); i-- > 0;)
    if (f[i] > 0.0) return i;
  return 0;
}

}  // namespace

void JumpKernelSpec::validate() const {
  if (terms.empty()) throw DomainError("jump kernel needs at least one term");
  for (const auto& term : terms) {
    if (const auto* p = std::get_if<PowerLawTerm>(&term)) {
      if (!(p->prefactor > 0.0) || !std::isfinite(p->prefactor))
        throw DomainError("power-law prefactor must be positive");
      if (!(p->omega > 0.0 && p->omega < 1.0))
        throw DomainError("power-law omega must lie in (0,1)");
    } else {
      const auto& w = std::get<ProfileWeightedTerm>(term);
      if (!(w.L > 0.0)) throw DomainError("profile-weighted L must be positive");
      if (w.lambda1 < 0.0 || w.lambda2 < 0.0)
        throw DomainError("profile-weighted lambdas must be nonnegative");
      if (w.epsilon < 0.0) throw DomainError("profile-weighted epsilon must be nonnegative");
      if (w.profile.size() == 0) throw DomainError("profile-weighted term without profile");
    }
  }
}

double JumpKernelSpec::power_law_exponent(double Z) const {
  double s = 0.0;
  for (const auto& term : terms)
    if (const auto* p = std::get_if<PowerLawTerm>(&term))
      s += p->prefactor * std::tgamma(1.0 - p->omega) / p->omega * std::pow(Z, p->omega);
  return s;
}

double JumpKernelSpec::min_omega() const {
  double w = 1.0;
  for (const auto& term : terms)
    if (const auto* p = std::get_if<PowerLawTerm>(&term)) w = std::min(w, p->omega);
  return w;
}

double DualSolution::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.h;
}

std::vector<double> DualSolution::survival() const {
  const std::size_t n = values.size();
  std::vector<double> phi(n, 0.0);
  double right = 0.0;
  for (std::size_t i = n; i-- > 1;) {
    phi[i] = grid.h * (right + 0.5 * values[i]);
    right += values[i];
  }
  if (n > 0) phi[0] = grid.h * (right + values[0]);
  return phi;
}

std::vector<double> DualSolution::function_values() const { return step ? survival() : values; }

double DualSolution::survival_at(double xi) const {
  const auto phi = survival();
  if (xi <= grid.xi_min) return phi.front();
  if (xi >= grid.xi_max()) return xi > grid.xi_max() ? 0.0 : phi.back();
  const double p = (xi - grid.xi_min) / grid.h;
  const std::size_t i = std::min(static_cast<std::size_t>(p), grid.n - 2);
  const double w = p - static_cast<double>(i);
  return (1.0 - w) * phi[i] + w * phi[i + 1];
}

DualSolution initial_solution(const JumpInit& init, const DualGridOptions& opt) {
  const InitShape s = shape_of(init);
  if (!(s.kappa > 0.0 && s.kappa < 1.0)) throw DomainError("mollifier radius must lie in (0,1)");
  if (s.n < 1) throw DomainError("mollifier fold count must be at least 1");
  if (opt.n < 16) throw DomainError("dual grid needs at least 16 nodes");
  if (!(opt.span > 2.0 * s.n * s.kappa)) throw DomainError("dual grid span shorter than the support");
  DualSolution sol;
  sol.A = s.A;
  sol.kappa = s.kappa;
  sol.n_mollify = s.n;
  sol.step = s.step;
  const double edge = sol.support_edge();
  sol.grid.n = opt.n;
  sol.grid.h = opt.span / static_cast<double>(opt.n - 1);
  sol.grid.xi_min = edge - opt.span;
  sol.values.assign(opt.n, 0.0);

  const double h = sol.grid.h;
  const double hf = std::min(s.kappa / 64.0, h / 8.0);
  const auto masses = mollified_masses(s.kappa, s.n, hf);
  const double step = 2.0 * s.kappa / std::ceil(2.0 * s.kappa / hf);
  const double x0 = s.A - s.n * s.kappa;
  // deposit each sample linearly onto its two neighbouring nodes
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (masses[k] == 0.0) continue;
    const double p = (x0 + step * static_cast<double>(k) - sol.grid.xi_min) / h;
    if (p <= 0.0) {
      sol.values[0] += masses[k];
      continue;
    }
    std::size_t i = static_cast<std::size_t>(p);
    double w = p - static_cast<double>(i);
    if (i >= opt.n - 1) {
      i = opt.n - 1;
      w = 0.0;
    }
    sol.values[i] += (1.0 - w) * masses[k];
    if (w > 0.0) sol.values[i + 1] += w * masses[k];
  }
  for (double& v : sol.values) v /= h;
  sol.total_mass = sol.mass();
  sol.mass_drift = std::abs(sol.total_mass - 1.0);
  sol.edge_history.push_back(last_positive(sol.values));
  return sol;
}

JumpSolver::JumpSolver(const JumpKernelSpec& spec, const UniformGrid& grid) : grid_(grid) {
  spec.validate();
  if (grid.n < 16 || !(grid.h > 0.0)) throw DomainError("invalid dual grid");
  g_.assign(grid.n, 0.0);
  for (const auto& term : spec.terms) {
    const TermRates r = std::holds_alternative<PowerLawTerm>(term)
                            ? power_law_rates(std::get<PowerLawTerm>(term), grid.h, grid.n)
                            : profile_rates(std::get<ProfileWeightedTerm>(term), grid.h, grid.n);
    for (std::size_t m = 1; m < grid.n; ++m) g_[m] += r.g[m];
    jump_rate_ += r.total;
    drift_ += r.drift;
  }
  // the drift is an upwind difference, i.e. a jump of one cell at rate drift/h
  g_[1] += drift_ / grid.h;
  loss_ = jump_rate_ + drift_ / grid.h;
}

void JumpSolver::advance(DualSolution& sol, double T, int n_steps, const Observer& observer) const {
  if (T < 0.0) throw DomainError("jump evolution needs T >= 0");
  if (T == 0.0) return;
  if (n_steps < 1) throw DomainError("jump evolution needs at least one step");
  if (sol.grid.n != grid_.n || sol.grid.h != grid_.h)
    throw DomainError("solution grid does not match the solver grid");
  const double dt = T / n_steps;
  if (dt * jump_rate_ > 10.0)
    throw CflError("dt * jump rate = " + format_double(dt * jump_rate_) +
                   " exceeds 10; increase n_steps");

  const std::size_t n = grid_.n;
  // rate of jumps of at least i cells from node i, all landing on node 0
  std::vector<double> reach(n, 0.0);
  {
    double inside = 0.0;
    for (std::size_t m = 1; m < n; ++m) inside += g_[m];
    const double beyond = std::max(loss_ - inside, 0.0);
    double suffix = beyond;
    for (std::size_t i = n; i-- > 1;) {
      suffix += g_[i];
      reach[i] = suffix;
    }
  }
  Correlator corr(g_, n);
  const double L = loss_;
  auto N = [&](const std::vector<double>& f, std::vector<double>& out) {
    corr.apply(f, out);
    const std::size_t e = last_positive(f);
    for (std::size_t i = e + 1; i < n; ++i) out[i] = 0.0;
    double g0 = L * f[0];
    for (std::size_t i = 1; i < n; ++i) g0 += reach[i] * f[i];
    out[0] = g0;
  };
  const EtdCoefficients c = etd_coefficients(-L, dt);

  std::vector<double> Nu(n), Na(n), Nb(n), Nc(n), a(n), b(n), cc(n);
  std::vector<double>& u = sol.values;
  for (int s = 0; s < n_steps; ++s) {
    N(u, Nu);
    for (std::size_t i = 0; i < n; ++i) a[i] = c.E2 * u[i] + c.Q * Nu[i];
    N(a, Na);
    for (std::size_t i = 0; i < n; ++i) b[i] = c.E2 * u[i] + c.Q * Na[i];
    N(b, Nb);
    for (std::size_t i = 0; i < n; ++i) cc[i] = c.E2 * a[i] + c.Q * (2.0 * Nb[i] - Nu[i]);
    N(cc, Nc);
    const std::size_t edge = last_positive(u);
    double clipped = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = c.E * u[i] + c.f1 * Nu[i] + 2.0 * c.f2 * (Na[i] + Nb[i]) + c.f3 * Nc[i];
      if (i > edge) v = 0.0;
      if (v < 0.0) {
        clipped -= v;
        v = 0.0;
      }
      u[i] = v;
    }
    sol.clipped_mass += clipped * grid_.h;
    sol.t += dt;
    sol.total_mass = sol.mass();
    sol.mass_drift = std::max(sol.mass_drift, std::abs(sol.total_mass - 1.0));
    sol.edge_history.push_back(last_positive(u));
    if (observer) observer(sol);
  }
}

int suggested_steps(const JumpKernelSpec& spec, const UniformGrid& grid, double T, double target) {
  if (T <= 0.0) return 1;
  const JumpSolver solver(spec, grid);
  return std::max(1, static_cast<int>(std::ceil(T * solver.loss_rate() / target)));
}

DualSolution solve_jump(const JumpKernelSpec& spec, const JumpInit& init, double T, int n_steps,
                        const DualGridOptions& grid) {
  if (T < 0.0) throw DomainError("jump evolution needs T >= 0");
  DualSolution sol = initial_solution(init, grid);
  if (T == 0.0) return sol;
  const JumpSolver solver(spec, sol.grid);
  solver.advance(sol, T, n_steps);
  return sol;
}

double exponential_moment(const DualSolution& sol, double Z) {
  if (!(Z > 0.0)) throw DomainError("exponential moment needs Z > 0");
  if (Z * (sol.grid.xi_max() - sol.grid.xi_min) > 700.0)
    throw DomainError("Z times the grid span exceeds 700; the moment would overflow");
  const double edge = sol.support_edge();
  double s = 0.0;
  for (std::size_t i = 0; i < sol.values.size(); ++i)
    s += sol.values[i] * std::exp(Z * (sol.grid.xi(i) - edge));
  return s * sol.grid.h;
}

double mollifier_moment(double kappa, int n, double Z) {
  // int phi_kappa(x) e^{Z (x - kappa)} dx, raised to the fold count
  const double one = bump_laplace(Z * kappa) / bump_mass() * std::exp(-Z * kappa);
  return std::pow(one, n);
}

double tail_mass(const DualSolution& sol, double D) {
  if (!(D > 0.0)) throw DomainError("tail mass needs D > 0");
  return std::max(sol.mass() - sol.survival_at(sol.A - D), 0.0);
}

TailBoundReport check_tail_bound(const DualSolution& sol, const std::vector<double>& D_list,
                                 double mu, double omega) {
  TailBoundReport r;
  std::vector<double> lx, ly;
  for (double D : D_list) {
    const double m = tail_mass(sol, D);
    r.D.push_back(D);
    r.mass.push_back(m);
    if (m > 0.0) {
      lx.push_back(std::log(D));
      ly.push_back(std::log(m));
    }
  }
  r.required = std::min(mu, omega) - 0.1;
  if (lx.size() >= 2) {
    fit_line(lx, ly, r.slope, r.intercept);
    r.pass = -r.slope >= r.required;
  }
  return r;
}

DualSolution convolve(const DualSolution& a, const DualSolution& b) {
  if (std::abs(a.grid.h - b.grid.h) > 1e-12 * a.grid.h)
    throw DomainError("convolution needs equal grid spacing");
  DualSolution c;
  c.grid.h = a.grid.h;
  c.grid.n = a.grid.n + b.grid.n - 1;
  c.grid.xi_min = a.grid.xi_min + b.grid.xi_min;
  c.A = a.A + b.A;
  c.n_mollify = a.n_mollify + b.n_mollify;
  c.kappa = (a.kappa * a.n_mollify + b.kappa * b.n_mollify) / c.n_mollify;
  c.t = std::max(a.t, b.t);
  c.values.assign(c.grid.n, 0.0);
  for (std::size_t i = 1; i < a.grid.n; ++i) {
    if (a.values[i] == 0.0) continue;
    const double ai = a.values[i] * a.grid.h;
    for (std::size_t j = 1; j < b.grid.n; ++j) c.values[i + j] += ai * b.values[j];
  }
  c.total_mass = c.mass();
  c.mass_drift = std::abs(c.total_mass - 1.0);
  return c;
}

double l1_distance(const DualSolution& a, const DualSolution& b, double lo, double hi) {
  const double h = a.grid.h;
  if (std::abs(h - b.grid.h) > 1e-12 * h) throw DomainError("L1 distance needs equal spacing");
  const double off = (b.grid.xi_min - a.grid.xi_min) / h;
  const long shift = std::lround(off);
  if (std::abs(off - static_cast<double>(shift)) > 1e-6)
    throw DomainError("L1 distance needs aligned grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.grid.n; ++i) {
    const double xi = a.grid.xi(i);
    if (xi < lo || xi > hi) continue;
    const long j = static_cast<long>(i) - shift;
    const double bv =
        (j >= 0 && j < static_cast<long>(b.grid.n)) ? b.values[static_cast<std::size_t>(j)] : 0.0;
    s += std::abs(a.values[i] - bv);
  }
  // nodes of b inside the window that a does not cover
  for (std::size_t j = 0; j < b.grid.n; ++j) {
    const long i = static_cast<long>(j) + shift;
    if (i >= 0 && i < static_cast<long>(a.grid.n)) continue;
    const double xi = b.grid.xi(j);
    if (xi < lo || xi > hi) continue;
    s += std::abs(b.values[j]);
  }
  return s * h;
}

JumpKernelSpec phi_kernel(double R, double epsilon, const PhiParams& params, double c0) {
  const double w1 = std::min(params.rho - params.b, params.rho);
  const double w2 = params.rho;
  const double ea = std::pow(epsilon, -params.a);
  const double m1 = std::max(std::pow(epsilon, params.b), 1.0);
  const double m2 = std::max(std::pow(epsilon, params.b), std::pow(R, params.b));
  JumpKernelSpec spec;
  spec.terms.push_back(PowerLawTerm{c0 * ea * m1, w1});
  spec.terms.push_back(PowerLawTerm{c0 * ea * (m1 + m2), w2});
  return spec;
}

double default_c0(const Profile& p, const KernelSpec& kernel, const RegularizationParams& reg,
                  double rho) {
  const double b = kernel.b;
  const double w1 = std::min(rho - b, rho), w2 = rho;
  const double al1 = std::max(0.0, b) - 2.0, al2 = -2.0;
  const auto& g = p.grid();
  const std::size_t n = g.size();
  // W_i(x_k) = int_{x_k}^inf h chi y^al_i dy as suffix sums of cell integrals
  auto suffix = [&](double al) {
    std::vector<double> W(n, 0.0);
    double acc = p.weighted_integral(
        [&](double y) { return cutoff_factor(reg, y) * std::pow(y, al); }, g.x_max(), kInf);
    W[n - 1] = acc;
    for (std::size_t k = n - 1; k-- > 0;) {
      acc += p.weighted_integral([&](double y) { return cutoff_factor(reg, y) * std::pow(y, al); },
                                 g.x(k), g.x(k + 1));
      W[k] = acc;
    }
    return W;
  };
  const auto W1 = suffix(al1), W2 = suffix(al2);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s1 = std::max(s1, W1[k] * std::pow(g.x(k), w1));
    s2 = std::max(s2, W2[k] * std::pow(g.x(k), w2));
  }
  return kernel.c2 * std::max(w1 * s1, w2 * s2);
}

DualSolution build_phi(double R, double kappa, double epsilon, const PhiParams& params, double c0,
                       double T, const DualRun& run) {
  if (!(R >= 1.0)) throw DomainError("build_phi needs R >= 1");
  if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("build_phi needs kappa in (0,1)");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("build_phi needs epsilon in (0,1]");
  if (!(c0 > 0.0)) throw DomainError("build_phi needs c0 > 0");
  if (T < 0.0) throw DomainError("build_phi needs T >= 0");
  const JumpKernelSpec spec = phi_kernel(R, epsilon, params, c0);
  DualGridOptions grid{run.n, run.span > 0.0 ? run.span : std::max(4.0 * R, 20.0)};
  DualSolution sol = initial_solution(StepMollified{R - kappa, kappa / 2.0, 2}, grid);
  if (T == 0.0) return sol;
  const JumpSolver solver(spec, sol.grid);
  const int steps = run.n_steps > 0
                        ? run.n_steps
                        : std::max(1, static_cast<int>(std::ceil(T * solver.loss_rate() / 0.5)));
  solver.advance(sol, T, steps);
  return sol;
}

WKernelParts w_kernel(const WParams& w, const Profile& profile_eps) {
  if (!(w.A >= 1.0)) throw DomainError("build_w needs A >= 1");
  if (!(w.nu > 0.0 && w.nu < 1.0)) throw DomainError("build_w needs nu in (0,1)");
  if (!(w.sigma > std::max(w.b, w.nu) && w.sigma < 1.0))
    throw DomainError("build_w needs sigma in (max(b, nu), 1)");
  if (!(w.L > 0.0) || !(w.c_tilde > 0.0)) throw DomainError("build_w needs L > 0 and c_tilde > 0");
  WKernelParts k;
  k.beta = w.b >= 0.0 ? w.b : w.nu * w.b;
  k.omega1 = std::min(w.rho - w.b, w.rho);
  k.omega2 = w.rho;
  const double Ana = std::pow(w.A, -w.nu * w.a), Ab = std::pow(w.A, k.beta);
  k.low = PowerLawTerm{w.c_tilde * Ana / std::pow(w.L, w.rho + w.a - std::max(0.0, w.b)), k.omega1};
  k.high = PowerLawTerm{w.c_tilde * Ab / std::pow(w.L, w.rho - w.b), k.omega2};
  k.near.profile = profile_eps;
  k.near.epsilon = w.epsilon;
  k.near.L = w.L;
  k.near.lambda1 = w.c_tilde * std::pow(w.L, w.b) * Ab;
  k.near.lambda2 = w.c_tilde * std::pow(w.L, -w.a) * Ana;
  k.near.a = w.a;
  k.near.b = w.b;
  return k;
}

JumpKernelSpec w_kernel_spec(const WParams& w, const Profile& profile_eps) {
  const WKernelParts k = w_kernel(w, profile_eps);
  JumpKernelSpec spec;
  spec.terms = {k.low, k.high, k.near};
  return spec;
}

WResult build_w(const WParams& w, const Profile& profile_eps, const DualRun& run) {
  if (w.T < 0.0) throw DomainError("build_w needs T >= 0");
  if (!(w.kappa > 0.0 && w.kappa < 1.0)) throw DomainError("build_w needs kappa in (0,1)");
  const JumpKernelSpec spec = w_kernel_spec(w, profile_eps);
  const double span = run.span > 0.0 ? run.span : 3.0 * std::pow(w.A, w.sigma) + 1.0;
  WResult r;
  r.w_tilde = initial_solution(StepMollified{w.A - w.kappa, w.kappa / 3.0, 3}, {run.n, span});
  if (w.T > 0.0) {
    const JumpSolver solver(spec, r.w_tilde.grid);
    const int steps =
        run.n_steps > 0 ? run.n_steps
                        : std::max(1, static_cast<int>(std::ceil(w.T * solver.loss_rate() / 0.5)));
    solver.advance(r.w_tilde, w.T, steps);
  }
  r.cut = std::pow(w.A, w.nu);
  r.w_cut = r.w_tilde.survival();
  for (std::size_t i = 0; i < r.w_cut.size(); ++i)
    if (r.w_tilde.grid.xi(i) < r.cut) r.w_cut[i] = 0.0;
  return r;
}

double w_deficit(const WResult& w, double A, double sigma) {
  return 1.0 - w.w_tilde.survival_at(A - std::pow(A, sigma));
}

double theta_formula(const WParams& w, double mu) {
  const double beta = w.b >= 0.0 ? w.b : w.nu * w.b;
  const double w1 = std::min(w.rho - w.b, w.rho);
  const double e = std::max({-mu * w.sigma, -w.nu * w.a - w.sigma * w1, beta - w.sigma * w.rho,
                             beta - w.sigma, -w.nu * w.a - w.sigma});
  return -e;
}

namespace {

double scan_r_delta(const std::function<double(double)>& F, double rho, double delta,
                    double A_max) {
  // 200 points per decade from A_max down to 1
  const int per_decade = 200;
  const int total = static_cast<int>(std::ceil(std::log10(A_max) * per_decade));
  double R = kInf;
  for (int k = total; k >= 0; --k) {
    const double r = std::pow(10.0, static_cast<double>(k) / per_decade);
    if (F(r) >= (1.0 - delta) * std::pow(r, 1.0 - rho))
      R = r;
    else
      break;
  }
  return R;
}

}  // namespace

RecursionReport verify_recursion(const std::function<double(double)>& F, double rho, double A0,
                                 double sigma, double nu, double theta, double T,
                                 const RecursionOptions& opt) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("verify_recursion needs sigma in (0,1)");
  if (T < 0.0) throw DomainError("verify_recursion needs T >= 0");
  RecursionReport r;
  r.delta = opt.delta;
  r.R_delta = scan_r_delta(F, rho, opt.delta, opt.A_max);
  const double alpha = std::exp(T);
  if (A0 <= 0.0) {
    if (T == 0.0) throw DomainError("verify_recursion with T = 0 needs an explicit A0");
    const double a_min = std::pow(alpha / (alpha - 1.0), 1.0 / (1.0 - sigma)) * (1.0 + 1e-9);
    A0 = std::max(std::isfinite(r.R_delta) ? r.R_delta : a_min, a_min);
  }
  if (!(A0 - std::pow(A0, sigma) > 0.0)) throw DomainError("verify_recursion needs A0 - A0^sigma > 0");
  r.A0 = A0;
  const double decay = std::exp(-(1.0 - rho) * T);
  double A = A0;
  for (int k = 0; k < opt.max_iter && A <= opt.A_max; ++k) {
    const double next = alpha * (A - std::pow(A, sigma));
    const double lhs = F(A);
    const double carried = F(next) * decay;
    const double pa = std::pow(A, nu * (1.0 - rho)), pt = std::pow(A, -theta);
    if (k == 0) r.C = std::max(0.0, (carried - lhs) / (pa + carried * pt));
    RecursionEntry e;
    e.k = k;
    e.A = A;
    e.lhs = lhs;
    e.rhs = -r.C * pa + carried * (1.0 - r.C * pt);
    e.margin = e.lhs - e.rhs;
    r.entries.push_back(e);
    if (T == 0.0 || !(next > A)) break;
    A = next;
  }
  r.holds = true;
  for (const auto& e : r.entries)
    if (e.A >= r.R_delta && e.margin < -1e-12 * std::abs(e.lhs)) r.holds = false;
  return r;
}

RecursionReport verify_recursion(const Profile& p, double A0, double sigma, double nu,
                                 double theta, double T, const RecursionOptions& opt) {
  return verify_recursion([&](double R) { return cumulative(p, R); }, p.rho(), A0, sigma, nu,
                          theta, T, opt);
}

double measure_r_delta(const Profile& p, double delta) {
  const double rho = p.rho();
  if (p.tail_amplitude() / (1.0 - rho) < 1.0 - delta) return kInf;
  const auto& F = p.cumulative_nodes();
  const auto& g = p.grid();
  double R = g.x_max();
  for (std::size_t i = g.size(); i-- > 0;) {
    if (F[i] >= (1.0 - delta) * std::pow(g.x(i), 1.0 - rho))
      R = g.x(i);
    else
      break;
  }
  return R;
}

TaylorCheckReport check_taylor_estimate(int tuples, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TaylorCheckReport rep;
  rep.tuples = tuples;
  rep.samples = samples;
  rep.worst_slack = kInf;
  for (int k = 0; k < tuples; ++k) {
    double d, rho, kap, R, R0, t;
    do {
      d = 0.01 + 0.98 * unit(rng);
      rho = 0.01 + 0.98 * unit(rng);
      kap = 0.99 * unit(rng) + 0.005;
      R = std::pow(10.0, 4.0 * unit(rng));
      R0 = R * std::pow(10.0, -3.0 + 3.5 * unit(rng));
      t = 5.0 * unit(rng);
    } while (R0 * std::exp(-t) > R || kap / R >= 1.0);
    const double q = std::pow(R0 / R, d) * std::exp(-d * t);
    const double lo = R0 / R * std::exp(-t) - 1.0 + kap / R, hi = kap / R;
    for (int s = 0; s <= samples; ++s) {
      const double xi = lo + (hi - lo) * s / samples;
      const double base = 1.0 - kap / R + xi;
      const double lhs = std::pow(base, 1.0 - rho) * (1.0 - q / std::pow(base, d));
      const double rhs = (1.0 - q) - std::abs(xi - kap / R);
      rep.worst_slack = std::min(rep.worst_slack, lhs - rhs);
    }
  }
  rep.holds = rep.worst_slack >= -1e-12;
  return rep;
}

}  // namespace smolu
