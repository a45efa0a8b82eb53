#include "smolu/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

#include <nlohmann/json.hpp>

#include "smolu/error.hpp"
#include "smolu/stationary.hpp"

namespace smolu {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_num(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> get_nums(const json& j, const char* key) {
  std::vector<double> out;
  const auto it = j.find(key);
  if (it == j.end()) return out;
  for (const auto& x : *it) out.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
  return out;
}

json membership(const MembershipReport& m) {
  return {{"holds", m.holds}, {"worst_margin", num(m.worst_margin)}, {"worst_r", num(m.worst_r)}};
}

MembershipReport get_membership(const json& j) {
  MembershipReport m;
  m.holds = j.at("holds").get<bool>();
  m.worst_margin = get_num(j, "worst_margin");
  m.worst_r = get_num(j, "worst_r");
  return m;
}

}  // namespace

std::string library_version() { return "0.1.0"; }

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunReport make_run_report(const Profile& p, const KernelSpec& kernel,
                          const RegularizationParams& reg, const ReportParams& params,
                          const SolveSummary& solve, const ReportOptions& opt) {
  RunReport r;
  r.version = library_version();
  r.params = params;
  r.solve = solve;
  r.residual_R = p.grid().nodes();
  r.residuals = stationary_residual_nodes(p, reg, kernel);
  r.f1 = check_f1(p, opt.f1_tol);
  r.f2_spec = opt.f2_spec;
  r.f2 = check_f2(p, opt.f2_spec, opt.f1_tol);
  try {
    r.tail_fit = fit_tail_exponent(p, opt.tail_decades, opt.tail_min_x);
  } catch (const InsufficientRangeError&) {
  }
  try {
    r.origin_fit = fit_origin_decay(p, reg.epsilon, kernel.a, opt.origin);
  } catch (const InsufficientRangeError&) {
  }
  r.l_eps = compute_l_eps(p, reg.epsilon, kernel.a, kernel.b);
  if (r.l_eps.L > 0.0) r.q_eps = compute_q_eps(p, kernel, reg.epsilon, r.l_eps.L, opt.q_X);

  RecursionSummary& rs = r.recursion;
  rs.sigma = opt.sigma;
  rs.nu = opt.nu;
  rs.theta = opt.theta;
  rs.T = opt.T;
  rs.delta = opt.delta;
  RecursionOptions ro;
  ro.delta = opt.delta;
  ro.A_max = 10.0 * p.grid().x_max();
  try {
    const RecursionReport rec = verify_recursion(p, 0.0, opt.sigma, opt.nu, opt.theta, opt.T, ro);
    rs.C = rec.C;
    rs.A0 = rec.A0;
    rs.R_delta = rec.R_delta;
    rs.holds = rec.holds;
    for (const auto& e : rec.entries) {
      rs.A.push_back(e.A);
      rs.margins.push_back(e.margin);
    }
  } catch (const DomainError&) {
  }
  return r;
}

std::string to_json(const RunReport& r) {
  json j;
  j["schema"] = r.schema;
  j["version"] = r.version;
  j["timestamps"] = {{"started", r.started}, {"finished", r.finished}};
  const auto& p = r.params;
  j["params"] = {{"kernel", p.kernel}, {"a", num(p.a)},           {"b", num(p.b)},
                 {"c1", num(p.c1)},    {"c2", num(p.c2)},         {"rho", num(p.rho)},
                 {"x_min", num(p.x_min)}, {"x_max", num(p.x_max)}, {"n", p.n},
                 {"epsilon", num(p.epsilon)}, {"lambda", num(p.lambda)}, {"mode", p.mode},
                 {"tol", num(p.tol)}};
  const auto& s = r.solve;
  j["solve"] = {{"method", s.method},       {"iterations", s.iterations}, {"t", num(s.t)},
                {"converged", s.converged}, {"residual", num(s.residual)}};
  j["residuals"] = {{"R", nums(r.residual_R)}, {"value", nums(r.residuals)}};
  j["f1"] = membership(r.f1);
  j["f2"] = membership(r.f2);
  j["f2"]["r0"] = num(r.f2_spec.r0);
  j["f2"]["delta"] = num(r.f2_spec.delta);
  j["tail_fit"] = {{"rho_hat", num(r.tail_fit.rho_hat)},
                   {"amp_hat", num(r.tail_fit.amp_hat)},
                   {"r2", num(r.tail_fit.r2)},
                   {"points", r.tail_fit.points}};
  j["origin_fit"] = {{"c_hat", num(r.origin_fit.c_hat)}, {"C_hat", num(r.origin_fit.C_hat)},
                     {"r2", num(r.origin_fit.r2)},       {"lo", num(r.origin_fit.lo)},
                     {"hi", num(r.origin_fit.hi)},       {"points", r.origin_fit.points}};
  j["l_eps"] = {{"mu", num(r.l_eps.mu)}, {"lambda", num(r.l_eps.lambda)}, {"L", num(r.l_eps.L)}};
  json q = json::array();
  for (const auto& e : r.q_eps.samples)
    q.push_back({{"X", num(e.X)}, {"Q", num(e.Q)}, {"lower", num(e.lower)}, {"upper", num(e.upper)}});
  j["q_eps"] = {{"L", num(r.q_eps.L)}, {"samples", q}};
  const auto& rc = r.recursion;
  j["recursion"] = {{"sigma", num(rc.sigma)}, {"nu", num(rc.nu)},   {"theta", num(rc.theta)},
                    {"T", num(rc.T)},         {"C", num(rc.C)},     {"A0", num(rc.A0)},
                    {"R_delta", num(rc.R_delta)}, {"delta", num(rc.delta)}, {"A", nums(rc.A)},
                    {"margins", nums(rc.margins)}, {"holds", rc.holds}};
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report JSON: ") + e.what());
  }
  RunReport r;
  try {
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != "report_v1") throw ConfigError("unsupported report schema " + r.schema);
    r.version = j.at("version").get<std::string>();
    r.started = j.at("timestamps").at("started").get<std::string>();
    r.finished = j.at("timestamps").at("finished").get<std::string>();
    const json& p = j.at("params");
    r.params.kernel = p.at("kernel").get<std::string>();
    r.params.a = get_num(p, "a");
    r.params.b = get_num(p, "b");
    r.params.c1 = get_num(p, "c1");
    r.params.c2 = get_num(p, "c2");
    r.params.rho = get_num(p, "rho");
    r.params.x_min = get_num(p, "x_min");
    r.params.x_max = get_num(p, "x_max");
    r.params.n = p.at("n").get<std::size_t>();
    r.params.epsilon = get_num(p, "epsilon");
    r.params.lambda = get_num(p, "lambda");
    r.params.mode = p.at("mode").get<std::string>();
    r.params.tol = get_num(p, "tol");
    const json& s = j.at("solve");
    r.solve.method = s.at("method").get<std::string>();
    r.solve.iterations = s.at("iterations").get<int>();
    r.solve.t = get_num(s, "t");
    r.solve.converged = s.at("converged").get<bool>();
    r.solve.residual = get_num(s, "residual");
    r.residual_R = get_nums(j.at("residuals"), "R");
    r.residuals = get_nums(j.at("residuals"), "value");
    r.f1 = get_membership(j.at("f1"));
    r.f2 = get_membership(j.at("f2"));
    r.f2_spec.r0 = get_num(j.at("f2"), "r0");
    r.f2_spec.delta = get_num(j.at("f2"), "delta");
    const json& t = j.at("tail_fit");
    r.tail_fit.rho_hat = get_num(t, "rho_hat");
    r.tail_fit.amp_hat = get_num(t, "amp_hat");
    r.tail_fit.r2 = get_num(t, "r2");
    r.tail_fit.points = t.at("points").get<std::size_t>();
    const json& o = j.at("origin_fit");
    r.origin_fit.c_hat = get_num(o, "c_hat");
    r.origin_fit.C_hat = get_num(o, "C_hat");
    r.origin_fit.r2 = get_num(o, "r2");
    r.origin_fit.lo = get_num(o, "lo");
    r.origin_fit.hi = get_num(o, "hi");
    r.origin_fit.points = o.at("points").get<std::size_t>();
    const json& l = j.at("l_eps");
    r.l_eps.mu = get_num(l, "mu");
    r.l_eps.lambda = get_num(l, "lambda");
    r.l_eps.L = get_num(l, "L");
    r.q_eps.L = get_num(j.at("q_eps"), "L");
    for (const auto& e : j.at("q_eps").at("samples"))
      r.q_eps.samples.push_back(
          {get_num(e, "X"), get_num(e, "Q"), get_num(e, "lower"), get_num(e, "upper")});
    const json& rc = j.at("recursion");
    r.recursion.sigma = get_num(rc, "sigma");
    r.recursion.nu = get_num(rc, "nu");
    r.recursion.theta = get_num(rc, "theta");
    r.recursion.T = get_num(rc, "T");
    r.recursion.C = get_num(rc, "C");
    r.recursion.A0 = get_num(rc, "A0");
    r.recursion.R_delta = get_num(rc, "R_delta");
    r.recursion.delta = get_num(rc, "delta");
    r.recursion.A = get_nums(rc, "A");
    r.recursion.margins = get_nums(rc, "margins");
    r.recursion.holds = rc.at("holds").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report JSON: ") + e.what());
  }
  return r;
}

}  // namespace smolu
