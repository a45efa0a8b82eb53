#include "commands.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acceptance.hpp"
#include "smolu/diagnostics.hpp"
#include "smolu/error.hpp"
#include "smolu/evolution.hpp"
#include "smolu/report.hpp"

namespace smolu::tools {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error("short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string out_dir(const RunConfig& c, const CommandOptions& opt) {
  const std::string dir = opt.out_dir.value_or(c.output.dir);
  fs::create_directories(dir);
  return dir;
}

ReportParams report_params(const RunConfig& c, const RegularizationParams& reg) {
  ReportParams p;
  p.kernel = to_string(c.kernel.form);
  p.a = c.kernel.a;
  p.b = c.kernel.b;
  p.c1 = c.kernel.c1;
  p.c2 = c.kernel.c2;
  p.rho = c.rho;
  p.x_min = c.grid.x_min;
  p.x_max = c.grid.x_max;
  p.n = c.grid.n;
  p.epsilon = reg.epsilon;
  p.lambda = reg.lambda;
  p.mode = c.solver.mode == SolveMode::Direct ? "direct" : "evolve";
  p.tol = c.solver.tol;
  return p;
}

ReportOptions report_options(const RunConfig& c, const RegularizationParams& reg) {
  ReportOptions o;
  o.f2_spec = c.invariant;
  // keep the tail fit clear of the cutoff transition
  if (reg.lambda > 0.0 && reg.lambda < 1.0) o.tail_min_x = 2.0 * cutoff_upper_zero(reg);
  return o;
}

void write_failure(const std::string& dir, const std::string& what, const std::vector<double>& trace) {
  json j = {{"status", "not_converged"}, {"error", what}, {"trace", json::array()}};
  for (double v : trace) j["trace"].push_back(num(v));
  write_file_atomic(dir + "/failure.json", j.dump(2) + "\n");
}

std::string dual_csv(const DualSolution& s) {
  std::string out = s.step ? "xi,Phi\n" : "xi,f\n";
  const std::vector<double> v = s.function_values();
  for (std::size_t i = 0; i < v.size(); ++i) out += format_double(s.grid.xi(i)) + "," + format_double(v[i]) + "\n";
  return out;
}

}  // namespace

int cmd_solve(const RunConfig& c, const CommandOptions& opt, std::ostream& log) {
  const std::string dir = out_dir(c, opt);
  const int dump_every = opt.dump_every.value_or(c.output.dump_every);
  const LogGrid grid = c.make_grid();
  const SelfSimilarParams params = c.params();
  const std::string started = utc_timestamp();

  std::optional<Profile> last;
  const EvolveObserver observer = [&](const EvolutionState& s, int step) {
    last = s.profile;
    if (dump_every > 0 && step % dump_every == 0)
      write_file_atomic(dir + "/dump_" + std::to_string(step) + ".csv", profile_csv(s.profile));
  };

  SolveSummary summary;
  Profile profile;
  try {
    if (c.solver.n_steps > 0) {
      const Evolver ev(grid, c.kernel, c.reg, params);
      PicardOptions po;
      po.dt_max = c.solver.dt_max;
      const EvolutionState s0 = make_state(seed_profile(params, c.invariant, grid), params, c.reg, c.kernel);
      const EvolutionState s = ev.evolve(s0, c.solver.T, c.solver.n_steps, po, observer);
      profile = s.profile;
      summary.method = "evolve_steps";
      summary.iterations = c.solver.n_steps;
      summary.t = s.t;
      summary.converged = true;
      summary.residual = max_abs(stationary_residual_nodes(profile, c.reg, c.kernel));
    } else {
      StationaryOptions so = c.stationary_options();
      so.dump_every = 1;
      so.observer = observer;
      const StationaryResult r = solve_stationary(c.solver.mode, params, c.reg, c.kernel, grid, c.invariant, so);
      profile = r.profile;
      summary.method = r.method;
      summary.iterations = r.iterations;
      summary.t = r.t;
      summary.converged = true;
      summary.residual = r.residual;
    }
  } catch (const TracedError& e) {
    log << "solve: " << e.what() << "\n";
    if (last) write_file_atomic(dir + "/profile_partial.csv", profile_csv(*last));
    write_failure(dir, e.what(), e.trace());
    return kExitFailed;
  }

  RunReport report = make_run_report(profile, c.kernel, c.reg, report_params(c, c.reg), summary, report_options(c, c.reg));
  report.started = started;
  report.finished = utc_timestamp();
  write_file_atomic(dir + "/profile.csv", profile_csv(profile));
  write_file_atomic(dir + "/report.json", to_json(report));
  log << "solve: " << summary.method << ", residual " << summary.residual << ", F1 "
      << (report.f1.holds ? "holds" : "fails") << ", tail rho_hat " << report.tail_fit.rho_hat << "\n";
  log << "wrote " << dir << "/profile.csv and " << dir << "/report.json\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, const CommandOptions& opt, std::ostream& log) {
  if (c.sweep.eps_list.empty()) throw ConfigError("sweep needs a sweep block with eps_list");
  const std::string dir = out_dir(c, opt);
  const LogGrid grid = c.make_grid();
  const std::string started = utc_timestamp();
  SweepResult sw;
  try {
    sw = epsilon_sweep(c.params(), c.kernel, grid, c.sweep.eps_list, c.sweep.lambda_list, c.invariant,
                       c.stationary_options(), c.reg.transition_width_ratio, c.solver.mode);
  } catch (const TracedError& e) {
    log << "sweep: " << e.what() << "\n";
    write_failure(dir, e.what(), e.trace());
    return kExitFailed;
  }

  json manifest = json::array();
  std::vector<double> Ls;
  for (std::size_t i = 0; i < sw.entries.size(); ++i) {
    const SweepEntry& e = sw.entries[i];
    RegularizationParams reg = c.reg;
    reg.epsilon = e.epsilon;
    reg.lambda = e.lambda;
    const SolveSummary summary{e.result.method, e.result.iterations, e.result.t, true, e.result.residual};
    RunReport rep = make_run_report(e.result.profile, c.kernel, reg, report_params(c, reg), summary, report_options(c, reg));
    rep.started = started;
    rep.finished = utc_timestamp();
    const std::string csv = "sweep_" + std::to_string(i) + ".csv";
    write_file_atomic(dir + "/" + csv, profile_csv(e.result.profile));
    write_file_atomic(dir + "/report_" + std::to_string(i) + ".json", to_json(rep));
    Ls.push_back(rep.l_eps.L);
    manifest.push_back({{"epsilon", num(e.epsilon)},
                        {"lambda", num(e.lambda)},
                        {"csv_path", csv},
                        {"residual", num(e.result.residual)},
                        {"tail_exponent", num(rep.tail_fit.rho_hat)},
                        {"origin_decay_c", num(rep.origin_fit.c_hat)},
                        {"norm_rho", num(norm_rho(e.result.profile))},
                        {"f1", rep.f1.holds},
                        {"f2", rep.f2.holds},
                        {"L_eps", num(rep.l_eps.L)}});
    log << "eps " << e.epsilon << ": residual " << e.result.residual << ", L_eps " << rep.l_eps.L << "\n";
  }
  bool cauchy_decreasing = true;
  for (std::size_t i = 1; i < sw.cauchy.size(); ++i) cauchy_decreasing = cauchy_decreasing && sw.cauchy[i] < sw.cauchy[i - 1];
  bool L_monotone = true;
  for (std::size_t i = 2; i < Ls.size(); ++i)
    L_monotone = L_monotone && (Ls[i] - Ls[i - 1]) * (Ls[i - 1] - Ls[i - 2]) >= 0.0;
  json summary = {{"cauchy", json::array()},
                  {"cauchy_decreasing", cauchy_decreasing},
                  {"limit_residual", num(sw.limit_residual)},
                  {"L_eps_monotone", L_monotone}};
  for (double d : sw.cauchy) summary["cauchy"].push_back(num(d));
  write_file_atomic(dir + "/manifest.json", manifest.dump(2) + "\n");
  write_file_atomic(dir + "/sweep_summary.json", summary.dump(2) + "\n");
  if (!L_monotone) log << "note: L_eps is not monotone across the sweep\n";
  log << "wrote " << sw.entries.size() << " profiles and " << dir << "/manifest.json\n";
  return kExitOk;
}

int cmd_dual(const RunConfig& c, const CommandOptions& opt, std::ostream& log) {
  if (!c.dual) throw ConfigError("dual needs a dual block");
  const DualConfig& d = *c.dual;
  const std::string dir = out_dir(c, opt);

  JumpKernelSpec kernel = d.kernel;
  double A = d.A, kappa = d.kappa;
  int n_mollify = d.n_mollify;
  const PhiParams phi{c.rho, c.kernel.a, c.kernel.b};
  if (d.kind == DualConfig::Kind::Phi) {
    kernel = phi_kernel(d.R, d.phi_epsilon, phi, d.c0);
    A = d.R - d.kappa;
    kappa = d.kappa / 2.0;
    n_mollify = 2;
  }

  json checks = json::array();
  double max_err = 0.0, drift = 0.0;
  json tail = nullptr;
  for (std::size_t k = 0; k < d.times.size(); ++k) {
    const double T = d.times[k];
    const int steps = std::max(1, static_cast<int>(std::lround(d.steps_per_unit * T)));
    DualSolution s;
    if (d.kind == DualConfig::Kind::Phi) {
      s = build_phi(d.R, d.kappa, d.phi_epsilon, phi, d.c0, T, DualRun{steps, d.n, d.span});
    } else if (d.step) {
      s = solve_jump(kernel, StepMollified{A, kappa, n_mollify}, T, steps, {d.n, d.span});
    } else {
      s = solve_jump(kernel, DeltaMollified{A, kappa, n_mollify}, T, steps, {d.n, d.span});
    }
    drift = std::max(drift, s.mass_drift);
    for (double Z : d.moment_Z) {
      const double numeric = exponential_moment(s, Z);
      const double oracle = mollifier_moment(kappa, n_mollify, Z) * std::exp(-T * kernel.power_law_exponent(Z));
      const double err = std::abs(numeric / oracle - 1.0);
      max_err = std::max(max_err, err);
      checks.push_back({{"t", num(T)}, {"Z", num(Z)}, {"numeric", num(numeric)}, {"oracle", num(oracle)},
                        {"rel_err", num(err)}});
    }
    if (k + 1 == d.times.size() && !d.tail_D.empty()) {
      const TailBoundReport t = check_tail_bound(s, d.tail_D, d.tail_mu, kernel.min_omega());
      tail = {{"slope", num(t.slope)}, {"intercept", num(t.intercept)}, {"required", num(t.required)},
              {"pass", t.pass}, {"D", t.D}, {"mass", json::array()}};
      for (double m : t.mass) tail["mass"].push_back(num(m));
    }
    char name[64];
    std::snprintf(name, sizeof name, "/dual_t%zu.csv", k);
    write_file_atomic(dir + name, dual_csv(s));
  }

  json terms = json::array();
  for (const JumpTerm& t : kernel.terms)
    if (const auto* p = std::get_if<PowerLawTerm>(&t))
      terms.push_back({{"type", "power_law"}, {"prefactor", num(p->prefactor)}, {"omega", num(p->omega)}});
  json report = {{"kernel_terms", terms}, {"A", num(A)},          {"kappa", num(kappa)},
                 {"n_mollify", n_mollify}, {"T", d.times},        {"mass_drift", num(drift)},
                 {"moment_checks", checks}, {"tail_fit", tail}};
  write_file_atomic(dir + "/dual_report.json", report.dump(2) + "\n");

  const bool pass = max_err <= d.oracle_tol && drift <= 1e-6;
  char line[128];
  std::snprintf(line, sizeof line, "laplace_oracle: max_rel_err %.3g", max_err);
  log << line << (pass ? "" : " FAIL") << "\n";
  std::snprintf(line, sizeof line, "mass_drift: %.3g", drift);
  log << line << "\n";
  return pass ? kExitOk : kExitFailed;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  const std::vector<CriterionResult> results = run_acceptance(c.verify_only, log);
  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  log << passed << "/" << results.size() << " criteria passed\n";
  return passed == static_cast<int>(results.size()) ? kExitOk : kExitFailed;
}

}  // namespace smolu::tools
