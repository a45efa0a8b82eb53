#include "smolu/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detail/operators.hpp"
#include "smolu/error.hpp"
#include "smolu/quadrature.hpp"

namespace smolu {

namespace {
constexpr double kStepGuard = 20.0;

Profile frame_profile(const LogGrid& grid, std::vector<double> h, double rho, double tail) {
  return Profile(grid, std::move(h), rho, tail);
}
}  // namespace

EvolutionState make_state(Profile h0, SelfSimilarParams params, RegularizationParams reg,
                          KernelSpec kernel) {
  if (std::abs(h0.rho() - params.rho) > 1e-14)
    throw DomainError("profile rho does not match the self-similar parameters");
  reg.validate();
  kernel.validate();
  EvolutionState s;
  s.profile = std::move(h0);
  s.params = params;
  s.reg = reg;
  s.kernel = std::move(kernel);
  return s;
}

Evolver::Evolver(const LogGrid& grid, KernelSpec kernel, RegularizationParams reg,
                 SelfSimilarParams params)
    : grid_(grid), kernel_(std::move(kernel)), reg_(reg), params_(params) {
  kernel_.validate();
  reg_.validate();
  check_admissible(params_.rho, kernel_);
  cache_ = std::make_shared<detail::OperatorCache>(grid_, kernel_, reg_, params_.rho, 16);
}

std::vector<double> Evolver::rate_nodes(const EvolutionState& s) const {
  auto a = cache_->at(s.frame_time)->loss(s.profile);
  for (double& v : a) v -= params_.rho;
  return a;
}

std::vector<double> Evolver::gain_nodes(const EvolutionState& s) const {
  return cache_->at(s.frame_time)->gain(s.profile);
}

EvolutionState Evolver::step_mild(const EvolutionState& s, double dt) const {
  if (!(dt > 0.0)) throw DomainError("step_mild needs dt > 0");
  const auto ops = cache_->at(s.frame_time + 0.5 * dt);
  auto a = ops->loss(s.profile);
  const auto q = ops->gain(s.profile);
  double sup = 0.0;
  for (double& v : a) {
    v -= params_.rho;
    sup = std::max(sup, std::abs(v));
  }
  if (dt * sup > kStepGuard) {
    std::ostringstream os;
    os << "dt * sup|A| = " << dt * sup << " exceeds " << kStepGuard;
    throw StepError(os.str());
  }
  std::vector<double> h(s.profile.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double z = a[i] * dt;
    h[i] = std::exp(-z) * s.profile.density(i) + quad::phi1(z) * dt * q[i];
  }
  EvolutionState out = s;
  out.profile = frame_profile(grid_, std::move(h), params_.rho,
                              s.profile.tail_amplitude() * std::exp(params_.rho * dt));
  out.t += dt;
  out.frame_time += dt;
  return out;
}

PicardResult Evolver::picard_solve(const EvolutionState& s, double T, const PicardOptions& opt) const {
  if (!(T > 0.0)) throw DomainError("picard_solve needs T > 0");
  if (!(opt.dt_max > 0.0) || opt.max_iter < 1) throw DomainError("invalid Picard options");
  const double rho = params_.rho;
  const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / opt.dt_max - 1e-9)));
  const double dt = T / static_cast<double>(m);
  const std::size_t n = grid_.size();
  const double c0 = s.profile.tail_amplitude();

  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = std::pow(grid_.x(i), rho);

  std::vector<std::vector<double>> H(m + 1, s.profile.density());
  std::vector<std::vector<double>> a(m + 1), q(m + 1);
  auto tail_at = [&](std::size_t j) { return c0 * std::exp(rho * dt * static_cast<double>(j)); };
  {
    const auto ops = cache_->at(s.frame_time);
    a[0] = ops->loss(s.profile);
    q[0] = ops->gain(s.profile);
    for (double& v : a[0]) v -= rho;
  }

  PicardResult result;
  int stalled = 0;
  bool converged = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    for (std::size_t j = 1; j <= m; ++j) {
      const Profile P = frame_profile(grid_, H[j], rho, tail_at(j));
      const auto ops = cache_->at(s.frame_time + dt * static_cast<double>(j));
      a[j] = ops->loss(P);
      for (double& v : a[j]) v -= rho;
      q[j] = ops->gain(P);
    }
    double dist = 0.0;
    std::vector<double> prev = H[0];
    for (std::size_t j = 1; j <= m; ++j) {
      std::vector<double> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double z = 0.5 * dt * (a[j - 1][i] + a[j][i]);
        const double ps = quad::psi(z);
        next[i] = std::exp(-z) * prev[i] + dt * (ps * q[j - 1][i] + (quad::phi1(z) - ps) * q[j][i]);
        if (!std::isfinite(next[i])) next[i] = HUGE_VAL;
        dist = std::max(dist, weight[i] * std::abs(next[i] - H[j][i]));
      }
      H[j] = next;
      prev = std::move(next);
    }
    if (!std::isfinite(dist)) dist = HUGE_VAL;
    const double last = result.distances.empty() ? HUGE_VAL : result.distances.back();
    result.distances.push_back(dist);
    if (dist <= opt.tol) {
      converged = true;
      break;
    }
    stalled = dist >= last ? stalled + 1 : 0;
    if (stalled >= 3 || !std::isfinite(dist)) {
      std::ostringstream os;
      os << "Picard iteration does not contract on an interval of length " << T
         << "; shrink T";
      throw NoContractionError(os.str(), result.distances);
    }
  }
  if (!converged)
    throw NonConvergenceError("Picard iteration hit max_iter without reaching tol", result.distances);

  result.state = s;
  result.state.profile = frame_profile(grid_, std::move(H[m]), rho, tail_at(m));
  result.state.t += T;
  result.state.frame_time += T;
  return result;
}

EvolutionState Evolver::unrescale(const EvolutionState& s) const {
  if (s.frame_time == 0.0) return s;
  const double tau = s.frame_time;
  const double rho = params_.rho;
  const double c = s.profile.tail_amplitude() * std::exp(-rho * tau);
  const std::size_t n = grid_.size();
  std::vector<double> h(n);
  if (std::abs(tau - grid_.du()) <= 1e-12 * grid_.du()) {
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = s.profile.density(i + 1);
    h[n - 1] = c * std::pow(grid_.x_max(), -rho);
  } else {
    const double stretch = std::exp(tau);
    for (std::size_t i = 0; i < n; ++i) h[i] = s.profile.value(grid_.x(i) * stretch);
  }
  EvolutionState out = s;
  out.profile = Profile(grid_, std::move(h), rho, c);
  out.frame_time = 0.0;
  return out;
}

EvolutionState Evolver::evolve(const EvolutionState& s, double T, int n_steps,
                               const PicardOptions& opt, const EvolveObserver& observer) const {
  if (T < 0.0) throw DomainError("evolve needs T >= 0");
  if (T == 0.0) return s;
  if (n_steps < 1) throw DomainError("evolve needs n_steps >= 1");
  const double tau = T / n_steps;
  EvolutionState cur = unrescale(s);
  for (int k = 0; k < n_steps; ++k) {
    cur = unrescale(picard_solve(cur, tau, opt).state);
    if (observer) observer(cur, k + 1);
  }
  return cur;
}

double op_a(const EvolutionState& s, double X) {
  if (!(X > 0.0)) throw DomainError("op_a needs X > 0");
  detail::FrameOperators ops(s.profile.grid(), s.kernel, s.reg, s.params.rho, s.frame_time, false);
  return ops.loss_at(s.profile, X) - s.params.rho;
}

double op_q(const EvolutionState& s, double X) {
  if (!(X > 0.0)) throw DomainError("op_q needs X > 0");
  detail::FrameOperators ops(s.profile.grid(), s.kernel, s.reg, s.params.rho, s.frame_time, false);
  return ops.gain_at(s.profile, X);
}

EvolutionState step_mild(const EvolutionState& s, double dt) {
  return Evolver(s.profile.grid(), s.kernel, s.reg, s.params).step_mild(s, dt);
}

PicardResult picard_solve(const EvolutionState& s, double T, const PicardOptions& opt) {
  return Evolver(s.profile.grid(), s.kernel, s.reg, s.params).picard_solve(s, T, opt);
}

EvolutionState evolve(const EvolutionState& s, double T, int n_steps, const PicardOptions& opt) {
  if (T == 0.0) return s;
  return Evolver(s.profile.grid(), s.kernel, s.reg, s.params).evolve(s, T, n_steps, opt);
}

}  // namespace smolu
