#include "smolu/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smolu/error.hpp"
#include "smolu/flux.hpp"
#include "smolu/quadrature.hpp"

namespace smolu {

namespace {

double relative_change(const std::vector<double>& prev, const std::vector<double>& next) {
  double ch = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double d = std::abs(next[i] - prev[i]);
    if (d == 0.0) continue;
    ch = std::max(ch, next[i] > 0.0 ? d / next[i] : 1.0);
  }
  return ch;
}

}  // namespace

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double stationary_residual(const Profile& p, const RegularizationParams& reg,
                           const KernelSpec& kernel, double R) {
  return FluxEvaluator(p.grid(), kernel, reg, p.rho(), 4).residual_at(p, R);
}

std::vector<double> stationary_residual_nodes(const Profile& p, const RegularizationParams& reg,
                                              const KernelSpec& kernel, std::size_t oversample) {
  return FluxEvaluator(p.grid(), kernel, reg, p.rho(), oversample).residual_nodes(p);
}

StationaryResult solve_stationary_evolve(const SelfSimilarParams& params,
                                         const RegularizationParams& reg, const KernelSpec& kernel,
                                         const LogGrid& grid, const InvariantSetSpec& spec,
                                         const StationaryOptions& opt,
                                         const std::optional<Profile>& start) {
  if (!(opt.tol > 0.0)) throw DomainError("stationary tol must be positive");
  const Evolver evolver(grid, kernel, reg, params);
  const FluxEvaluator flux(grid, kernel, reg, params.rho, opt.oversample);
  EvolutionState s = make_state(start ? *start : seed_profile(params, spec, grid), params, reg, kernel);
  if (!(s.profile.grid() == grid)) throw DomainError("start profile lives on a different grid");

  StationaryResult res;
  res.method = "evolve";
  const double tau = grid.du();
  const int check_every = std::max(1, opt.check_every);
  for (int k = 1;; ++k) {
    const std::vector<double> prev = s.profile.density();
    s = evolver.unrescale(evolver.picard_solve(s, tau, opt.picard).state);
    if (opt.observer && opt.dump_every > 0 && k % opt.dump_every == 0) opt.observer(s, k);
    const bool out_of_time = s.t >= opt.T_max;
    if (k == 1 || k % check_every == 0 || out_of_time) {
      const double change = relative_change(prev, s.profile.density());
      const double r = max_abs(flux.residual_nodes(s.profile));
      res.residual_trace.push_back(r);
      res.change_trace.push_back(change);
      if (r <= opt.tol && (change <= opt.change_tol || std::isinf(opt.tol))) {
        res.profile = s.profile;
        res.residual = r;
        res.t = s.t;
        res.iterations = k;
        return res;
      }
    }
    if (out_of_time) {
      std::ostringstream os;
      os << "no stationary profile within T_max = " << opt.T_max << " (last residual "
         << res.residual_trace.back() << ")";
      throw NonConvergenceError(os.str(), res.residual_trace);
    }
  }
}

namespace {

StationaryResult direct_characteristic(const SelfSimilarParams& params,
                                       const RegularizationParams& reg, const KernelSpec& kernel,
                                       const LogGrid& grid, const StationaryOptions& opt,
                                       const std::optional<Profile>& start) {
  const double rho = params.rho;
  const double c = 1.0 - rho;
  const Evolver evolver(grid, kernel, reg, params);
  const std::size_t n = grid.size();
  const double L = grid.du();
  Profile h = start ? start->with_tail_amplitude(c) : Profile::power_law(grid, rho, c);

  StationaryResult res;
  res.method = "direct";
  int growing = 0;
  for (int it = 1; it <= opt.max_sweeps; ++it) {
    EvolutionState s = make_state(h, params, reg, kernel);
    const auto a = evolver.rate_nodes(s);
    const auto q = evolver.gain_nodes(s);
    std::vector<double> next(n);
    next[n - 1] = c * std::pow(grid.x_max(), -rho);
    for (std::size_t i = n - 1; i-- > 0;) {
      const double z = 0.5 * L * (a[i] + a[i + 1]);
      const double ps = quad::psi(z);
      next[i] = std::exp(-z) * next[i + 1] + L * (ps * q[i + 1] + (quad::phi1(z) - ps) * q[i]);
    }
    std::vector<double> relaxed(n);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      relaxed[i] = (1.0 - opt.relax) * h.density(i) + opt.relax * next[i];
      finite = finite && std::isfinite(relaxed[i]);
    }
    const double change = finite ? relative_change(h.density(), relaxed)
                                 : std::numeric_limits<double>::infinity();
    growing = (!res.change_trace.empty() && change > res.change_trace.back()) ? growing + 1 : 0;
    res.change_trace.push_back(change);
    if (!finite || growing >= 5)
      throw IterationDivergenceError("direct sweep diverges", res.change_trace);
    h = Profile(grid, std::move(relaxed), rho, c);
    res.iterations = it;
    if (change <= opt.sweep_tol) {
      res.profile = h;
      return res;
    }
  }
  throw NonConvergenceError("direct sweep hit max_sweeps", res.change_trace);
}

StationaryResult direct_flux(const SelfSimilarParams& params, const RegularizationParams& reg,
                             const KernelSpec& kernel, const LogGrid& grid,
                             const StationaryOptions& opt, const std::optional<Profile>& start) {
  const double rho = params.rho;
  const double c = 1.0 - rho;
  const FluxEvaluator flux(grid, kernel, reg, rho, opt.oversample);
  const std::size_t n = grid.size();
  Profile h = start ? start->with_tail_amplitude(c) : Profile::power_law(grid, rho, c);

  StationaryResult res;
  res.method = "direct";
  int growing = 0;
  for (int it = 1; it <= opt.max_sweeps; ++it) {
    const auto I = flux.flux_nodes(h);
    const auto& F = h.cumulative_nodes();
    std::vector<double> relaxed(n);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double target = std::max(0.0, (I[i] + (1.0 - rho) * F[i]) / grid.x(i));
      relaxed[i] = (1.0 - opt.relax) * h.density(i) + opt.relax * target;
      finite = finite && std::isfinite(relaxed[i]);
    }
    double change = std::numeric_limits<double>::infinity();
    if (finite) {
      Profile cand(grid, relaxed, rho, c);
      const double fit = cand.fit_tail_amplitude();
      if (fit > 0.0)
        for (double& v : relaxed) v *= c / fit;
      change = relative_change(h.density(), relaxed);
      finite = std::isfinite(change);
    }
    growing = (!res.change_trace.empty() && change > res.change_trace.back()) ? growing + 1 : 0;
    res.change_trace.push_back(change);
    if (!finite || growing >= 5)
      throw IterationDivergenceError("direct flux iteration diverges", res.change_trace);
    h = Profile(grid, std::move(relaxed), rho, c);
    res.iterations = it;
    if (change <= opt.sweep_tol) {
      res.profile = h;
      return res;
    }
  }
  throw NonConvergenceError("direct flux iteration hit max_sweeps", res.change_trace);
}

}  // namespace

StationaryResult solve_stationary_direct(const SelfSimilarParams& params,
                                         const RegularizationParams& reg, const KernelSpec& kernel,
                                         const LogGrid& grid, const StationaryOptions& opt,
                                         const std::optional<Profile>& start) {
  if (!(opt.relax > 0.0 && opt.relax <= 1.0)) throw DomainError("relax must lie in (0, 1]");
  check_admissible(params.rho, kernel);
  StationaryResult res;
  try {
    res = opt.scheme == DirectScheme::Characteristic
              ? direct_characteristic(params, reg, kernel, grid, opt, start)
              : direct_flux(params, reg, kernel, grid, opt, start);
  } catch (const IterationDivergenceError&) {
    if (!opt.fallback) throw;
    res = solve_stationary_evolve(params, reg, kernel, grid, InvariantSetSpec{}, opt, start);
    res.method = "direct->evolve";
    return res;
  }
  res.residual = max_abs(stationary_residual_nodes(res.profile, reg, kernel, opt.oversample));
  return res;
}

double weighted_l1(const Profile& h1, const Profile& h2, double lo, double hi) {
  double num = 0.0, den = 0.0;
  const LogGrid& g = h2.grid();
  const bool same = h1.grid() == g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (x < lo * (1 - 1e-12) || x > hi * (1 + 1e-12)) continue;
    const double a = same ? h1.density(i) : h1.value(x);
    num += std::abs(a - h2.density(i)) * x;
    den += h2.density(i) * x;
  }
  return den > 0.0 ? num / den : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
}

StationaryResult solve_stationary(SolveMode mode, const SelfSimilarParams& params,
                                  const RegularizationParams& reg, const KernelSpec& kernel,
                                  const LogGrid& grid, const InvariantSetSpec& spec,
                                  const StationaryOptions& opt, const std::optional<Profile>& start) {
  if (mode == SolveMode::Direct) return solve_stationary_direct(params, reg, kernel, grid, opt, start);
  return solve_stationary_evolve(params, reg, kernel, grid, spec, opt, start);
}

SweepResult epsilon_sweep(const SelfSimilarParams& params, const KernelSpec& kernel,
                          const LogGrid& grid, const std::vector<double>& eps_list,
                          const std::vector<double>& lambda_list, const InvariantSetSpec& spec,
                          const StationaryOptions& opt, double transition_width_ratio,
                          SolveMode mode) {
  if (eps_list.empty()) throw DomainError("eps_list is empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw DomainError("eps_list must be strictly decreasing");
  if (lambda_list.size() != 1 && lambda_list.size() != eps_list.size())
    throw DomainError("lambda_list needs one entry or one per epsilon");

  SweepResult out;
  std::optional<Profile> warm;
  RegularizationParams reg;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    reg = RegularizationParams{eps_list[i], lambda_list.size() == 1 ? lambda_list[0] : lambda_list[i],
                               transition_width_ratio};
    SweepEntry e;
    e.epsilon = reg.epsilon;
    e.lambda = reg.lambda;
    e.result = solve_stationary(mode, params, reg, kernel, grid, spec, opt, warm);
    warm = e.result.profile;
    if (!out.entries.empty())
      out.cauchy.push_back(weighted_l1(out.entries.back().result.profile, e.result.profile));
    out.entries.push_back(std::move(e));
  }
  out.limit = out.entries.back().result.profile;
  RegularizationParams unshifted = reg;
  unshifted.epsilon = 0.0;
  out.limit_residual = max_abs(stationary_residual_nodes(out.limit, unshifted, kernel, opt.oversample));
  return out;
}

}  // namespace smolu
