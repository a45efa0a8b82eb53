#include "smolu/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "smolu/error.hpp"
#include "smolu/quadrature.hpp"

namespace smolu {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// node snapping for positions that land on a node up to rounding
constexpr double kSnap = 1e-9;
}  // namespace

// ---------------------------------------------------------------- LogGrid

LogGrid::LogGrid(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max) {
  if (!(x_min > 0.0) || !(x_max > x_min)) throw DomainError("LogGrid needs 0 < x_min < x_max");
  if (n < 16) throw DomainError("LogGrid needs at least 16 nodes");
  u0_ = std::log(x_min);
  du_ = std::log(x_max / x_min) / static_cast<double>(n - 1);
  x_.resize(n);
  for (std::size_t i = 0; i < n; ++i) x_[i] = x_min * std::exp(du_ * static_cast<double>(i));
  x_.front() = x_min;
  x_.back() = x_max;
}

double LogGrid::position(double x) const { return (std::log(x) - u0_) / du_; }

LogGrid LogGrid::refined(std::size_t factor) const {
  if (factor == 0) throw DomainError("refinement factor must be positive");
  return LogGrid(x_min_, x_max_, (size() - 1) * factor + 1);
}

// ---------------------------------------------------------------- Profile

Profile::Profile(LogGrid grid, std::vector<double> density, double rho, double tail_amplitude)
    : grid_(std::move(grid)), h_(std::move(density)), rho_(rho), tail_(tail_amplitude) {
  build();
}

void Profile::build() {
  if (h_.size() != grid_.size()) throw DomainError("profile density size does not match grid");
  for (double v : h_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("profile density must be finite and >= 0");
  if (!(tail_ >= 0.0)) throw DomainError("tail amplitude must be >= 0");
  if (!(rho_ > 0.0 && rho_ < 1.0)) throw DomainError("profile rho must lie in (0, 1)");

  const double L = grid_.du();
  s0_ = -rho_;
  if (h_[0] > 0.0 && h_[1] > 0.0) s0_ = std::max(std::log(h_[1] / h_[0]) / L, -rho_);
  lower_mass_ = h_[0] > 0.0 ? h_[0] * grid_.x_min() / (s0_ + 1.0) : 0.0;

  F_.assign(h_.size(), 0.0);
  F_[0] = lower_mass_;
  for (std::size_t i = 0; i + 1 < h_.size(); ++i) F_[i + 1] = F_[i] + cell_mass(i);
}

Profile Profile::power_law(const LogGrid& grid, double rho, double amplitude) {
  std::vector<double> h(grid.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = amplitude * std::pow(grid.x(i), -rho);
  return Profile(grid, std::move(h), rho, amplitude);
}

Profile Profile::from_function(const LogGrid& grid, double rho,
                               const std::function<double(double)>& f, double tail_amplitude) {
  std::vector<double> h(grid.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = f(grid.x(i));
  return Profile(grid, std::move(h), rho, tail_amplitude);
}

double Profile::cell_mass(std::size_t i) const {
  return quad::loglin_cell(grid_.du(), h_[i] * grid_.x(i), h_[i + 1] * grid_.x(i + 1));
}

double Profile::value(double x) const {
  if (!(x > 0.0)) return 0.0;
  const std::size_t n = h_.size();
  if (x < grid_.x_min()) return h_[0] > 0.0 ? h_[0] * std::pow(x / grid_.x_min(), s0_) : 0.0;
  if (x > grid_.x_max()) return tail_ * std::pow(x, -rho_);
  const double p = grid_.position(x);
  std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(p), 0.0, static_cast<double>(n - 2)));
  double w = p - static_cast<double>(i);
  if (w < kSnap) return h_[i];
  if (w > 1.0 - kSnap) return h_[i + 1];
  return quad::loglin_value(h_[i], h_[i + 1], w);
}

Profile Profile::with_density(std::vector<double> density) const {
  return Profile(grid_, std::move(density), rho_, tail_);
}

Profile Profile::with_tail_amplitude(double c) const { return Profile(grid_, h_, rho_, c); }

Profile Profile::scaled(double s) const {
  std::vector<double> h = h_;
  for (double& v : h) v *= s;
  return Profile(grid_, std::move(h), rho_, tail_ * s);
}

double Profile::fit_tail_amplitude(double decades) const {
  const double lo = grid_.x_max() * std::pow(10.0, -decades);
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < h_.size(); ++i) {
    if (grid_.x(i) < lo * (1.0 - 1e-12) || !(h_[i] > 0.0)) continue;
    sum += std::log(h_[i]) + rho_ * std::log(grid_.x(i));
    ++count;
  }
  return count == 0 ? 0.0 : std::exp(sum / count);
}

Profile Profile::with_refit_tail(double decades) const {
  return with_tail_amplitude(fit_tail_amplitude(decades));
}

double Profile::weighted_integral(const std::function<double(double)>& g, double lo, double hi,
                                  int order) const {
  if (!(hi > lo)) return 0.0;
  lo = std::max(lo, 0.0);
  const auto rule = quad::gauss_legendre_unit(order);
  // integrand in u = log x
  auto piece = [&](double ua, double ub) {
    double s = 0.0;
    for (int k = 0; k < rule.size; ++k) {
      const double u = ua + (ub - ua) * rule.nodes[k];
      const double x = std::exp(u);
      s += rule.weights[k] * value(x) * g(x) * x;
    }
    return s * (ub - ua);
  };
  double total = 0.0;
  const double xmin = grid_.x_min(), xmax = grid_.x_max();

  // lower closure
  if (lo < xmin && h_[0] > 0.0) {
    const double ub = std::log(std::min(hi, xmin));
    if (lo > 0.0) {
      const double ua = std::log(lo);
      for (double a = ua; a < ub; a += 1.0) total += piece(a, std::min(a + 1.0, ub));
    } else {
      double b = ub;
      for (int k = 0; k < 400; ++k) {
        const double part = piece(b - 1.0, b);
        total += part;
        b -= 1.0;
        if (std::abs(part) <= 1e-17 * std::abs(total)) break;
      }
    }
  }
  // grid cells
  const double a = std::max(lo, xmin), b = std::min(hi, xmax);
  if (b > a) {
    const double L = grid_.du();
    const double pa = grid_.position(a), pb = grid_.position(b);
    const std::size_t n = h_.size();
    std::size_t i0 = static_cast<std::size_t>(std::clamp(std::floor(pa), 0.0, static_cast<double>(n - 2)));
    for (std::size_t i = i0; i + 1 < n; ++i) {
      const double wa = std::max(pa - static_cast<double>(i), 0.0);
      const double wb = std::min(pb - static_cast<double>(i), 1.0);
      if (wb <= wa) {
        if (static_cast<double>(i) >= pb) break;
        continue;
      }
      if (!(h_[i] > 0.0) || !(h_[i + 1] > 0.0)) continue;
      total += piece(grid_.u(i) + wa * L, grid_.u(i) + wb * L);
    }
  }
  // tail closure
  if (hi > xmax && tail_ > 0.0) {
    const double ua = std::log(std::max(lo, xmax));
    if (std::isfinite(hi)) {
      const double ub = std::log(hi);
      for (double u = ua; u < ub; u += 1.0) total += piece(u, std::min(u + 1.0, ub));
    } else {
      double u = ua;
      for (int k = 0; k < 2000; ++k) {
        const double part = piece(u, u + 1.0);
        total += part;
        u += 1.0;
        if (std::abs(part) <= 1e-17 * std::abs(total)) break;
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------- params

void InvariantSetSpec::validate() const {
  if (!(r0 >= 1.0)) throw DomainError("invariant set needs R0 >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("invariant set needs delta in (0,1)");
}

SelfSimilarParams SelfSimilarParams::from_rho(double rho, double gamma) {
  if (!(rho > gamma)) throw AdmissibilityError("rho must exceed gamma for beta > 0");
  SelfSimilarParams p;
  p.rho = rho;
  p.gamma = gamma;
  p.beta = 1.0 / (rho - gamma);
  p.alpha = 1.0 + (1.0 + gamma) * p.beta;
  return p;
}

void check_admissible(double rho, const KernelSpec& kernel) {
  const double lo = std::max(kernel.b, 0.0);
  if (!(rho > lo && rho < 1.0)) {
    std::ostringstream os;
    os << "rho = " << rho << " outside the admissible interval (max(b,0), 1) = (" << lo << ", 1)";
    throw AdmissibilityError(os.str());
  }
  if (!(rho + kernel.a > 0.0)) throw AdmissibilityError("rho + a must be positive");
}

// ---------------------------------------------------------------- integrals

double cumulative(const Profile& p, double R) {
  if (!(R > 0.0)) return 0.0;
  const LogGrid& g = p.grid();
  const auto& h = p.density();
  const auto& F = p.cumulative_nodes();
  const double rho = p.rho();
  if (R <= g.x_min()) {
    if (!(h[0] > 0.0)) return 0.0;
    return p.lower_mass() * std::pow(R / g.x_min(), p.lower_slope() + 1.0);
  }
  if (R >= g.x_max()) {
    if (std::isinf(R)) return p.tail_amplitude() > 0.0 ? kInf : F.back();
    return F.back() + p.tail_amplitude() *
                          (std::pow(R, 1.0 - rho) - std::pow(g.x_max(), 1.0 - rho)) / (1.0 - rho);
  }
  const double pos = g.position(R);
  const std::size_t n = h.size();
  std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(n - 2)));
  const double w = pos - static_cast<double>(i);
  if (w < kSnap) return F[i];
  if (w > 1.0 - kSnap) return F[i + 1];
  return F[i] + quad::loglin_partial(g.du(), h[i] * g.x(i), h[i + 1] * g.x(i + 1), 0.0, w);
}

double norm_rho(const Profile& p) {
  const auto& F = p.cumulative_nodes();
  const double e = 1.0 - p.rho();
  double best = p.tail_amplitude() / e;
  for (std::size_t i = 0; i < F.size(); ++i)
    best = std::max(best, F[i] / std::pow(p.grid().x(i), e));
  return best;
}

double moment(const Profile& p, double alpha, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo)) throw DomainError("moment needs 0 <= lo < hi");
  const double rho = p.rho();
  const LogGrid& g = p.grid();
  const auto& h = p.density();
  if (std::isinf(hi) && alpha >= rho - 1.0)
    throw DivergenceError("moment to infinity diverges for alpha >= rho - 1");

  auto power_int = [](double c, double e, double a, double b) {
    // c int_a^b x^{e-1} dx with a > 0 or e > 0
    if (e == 0.0) return c * std::log(b / a);
    if (std::isinf(b)) return c * std::pow(a, e) / (-e);
    return c * (std::pow(b, e) - std::pow(a, e)) / e;
  };

  double total = 0.0;
  const double xmin = g.x_min(), xmax = g.x_max();
  if (lo < xmin && h[0] > 0.0) {
    const double s0 = p.lower_slope();
    const double e = alpha + s0 + 1.0;
    if (lo == 0.0 && e <= 0.0) throw DivergenceError("moment diverges at the origin");
    total += power_int(h[0] * std::pow(xmin, -s0), e, lo, std::min(hi, xmin));
  }
  const double a = std::max(lo, xmin), b = std::min(hi, xmax);
  if (b > a) {
    const double pa = g.position(a), pb = g.position(b);
    const std::size_t n = h.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double wa = std::max(pa - static_cast<double>(i), 0.0);
      const double wb = std::min(pb - static_cast<double>(i), 1.0);
      if (wb <= wa) continue;
      total += quad::loglin_partial(g.du(), h[i] * std::pow(g.x(i), alpha + 1.0),
                                    h[i + 1] * std::pow(g.x(i + 1), alpha + 1.0), wa, wb);
    }
  }
  if (hi > xmax && p.tail_amplitude() > 0.0)
    total += power_int(p.tail_amplitude(), alpha - rho + 1.0, std::max(lo, xmax), hi);
  return total;
}

double moment_bound_constant(double alpha, double rho) {
  if (!(alpha > rho - 1.0)) throw DomainError("near-origin bound needs alpha > rho - 1");
  if (alpha >= 0.0) return 1.0;
  return std::pow(2.0, -alpha) / (1.0 - std::pow(2.0, rho - 1.0 - alpha));
}

double tail_moment_bound_constant(double alpha, double rho) {
  if (!(alpha < rho - 1.0)) throw DomainError("tail bound needs alpha < rho - 1");
  return std::pow(2.0, 1.0 - rho) / (1.0 - std::pow(2.0, 1.0 - rho + alpha));
}

MomentBoundReport check_moment_bounds(const Profile& p, const std::vector<double>& alphas,
                                      const std::vector<double>& D_list) {
  MomentBoundReport rep;
  rep.norm = norm_rho(p);
  const double rho = p.rho();
  for (double alpha : alphas) {
    if (alpha == rho - 1.0) throw DomainError("moment bound undefined at alpha = rho - 1");
    const bool near = alpha > rho - 1.0;
    const double C = near ? moment_bound_constant(alpha, rho) : tail_moment_bound_constant(alpha, rho);
    for (double D : D_list) {
      MomentBoundEntry e{};
      e.alpha = alpha;
      e.D = D;
      e.integral = near ? moment(p, alpha, 0.0, D) : moment(p, alpha, D, kInf);
      e.bound = C * rep.norm * std::pow(D, 1.0 - rho + alpha);
      e.ratio = e.bound > 0.0 ? e.integral / e.bound : 0.0;
      e.pass = e.integral <= e.bound * (1.0 + 1e-12);
      rep.all_pass = rep.all_pass && e.pass;
      rep.entries.push_back(e);
    }
  }
  return rep;
}

// ---------------------------------------------------------------- invariant set

MembershipReport check_f1(const Profile& p, double tol) {
  MembershipReport rep;
  const double e = 1.0 - p.rho();
  const auto& F = p.cumulative_nodes();
  rep.worst_margin = kInf;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double r = p.grid().x(i);
    const double slack = 1.0 + tol - F[i] / std::pow(r, e);
    if (slack < rep.worst_margin) {
      rep.worst_margin = slack;
      rep.worst_r = r;
    }
  }
  const double limit_slack = 1.0 + tol - p.tail_amplitude() / e;
  if (limit_slack < rep.worst_margin) {
    rep.worst_margin = limit_slack;
    rep.worst_r = kInf;
  }
  rep.holds = rep.worst_margin >= 0.0;
  return rep;
}

MembershipReport check_f2(const Profile& p, const InvariantSetSpec& spec, double tol) {
  MembershipReport rep;
  const double e = 1.0 - p.rho();
  rep.worst_margin = kInf;
  auto visit = [&](double r, double F) {
    const double lower = std::max(0.0, 1.0 - std::pow(spec.r0 / r, spec.delta)) * (1.0 - tol);
    const double slack = F / std::pow(r, e) - lower;
    if (slack < rep.worst_margin) {
      rep.worst_margin = slack;
      rep.worst_r = r;
    }
  };
  const auto& F = p.cumulative_nodes();
  for (std::size_t i = 0; i < F.size(); ++i) visit(p.grid().x(i), F[i]);
  for (int k = 1; k <= 8; ++k) {
    const double r = p.grid().x_max() * std::pow(10.0, k);
    visit(r, cumulative(p, r));
  }
  const double limit_slack = p.tail_amplitude() / e - (1.0 - tol);
  if (limit_slack < rep.worst_margin) {
    rep.worst_margin = limit_slack;
    rep.worst_r = kInf;
  }
  rep.holds = rep.worst_margin >= 0.0;
  return rep;
}

bool satisfies_f1(const Profile& p, double tol) { return check_f1(p, tol).holds; }

bool satisfies_f2(const Profile& p, const InvariantSetSpec& spec, double tol) {
  return check_f2(p, spec, tol).holds;
}

Profile seed_profile(const SelfSimilarParams& params, const InvariantSetSpec& spec,
                     const LogGrid& grid) {
  spec.validate();
  const double rho = params.rho;
  const double c = 1.0 - rho;
  std::vector<double> h(grid.size(), 0.0);
  std::size_t first = 0;  // first node at or above R0
  while (first < grid.size() && grid.x(first) < spec.r0) ++first;
  for (std::size_t i = first; i < grid.size(); ++i) h[i] = c * std::pow(grid.x(i), -rho);

  if (first > 0 && first < grid.size() && grid.x(first) > spec.r0) {
    // node below R0 carries the mass of [R0, x_first] through its cell
    const std::size_t k = first - 1;
    const double L = grid.du();
    const double b = h[first] * grid.x(first);
    const double target = std::pow(grid.x(first), 1.0 - rho) - std::pow(spec.r0, 1.0 - rho);
    // cell mass = L b phi1(r) with r = log(b / (h_k x_k))
    const double want = target / (L * b);
    auto f = [&](double r) { return quad::phi1(r) - want; };
    const double r_lo = std::log(b / (c * std::pow(grid.x(k), 1.0 - rho)));
    double r_hi = std::max(r_lo, 1.0);
    while (f(r_hi) > 0.0) r_hi *= 2.0;
    boost::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        f, r_lo, r_hi, boost::math::tools::eps_tolerance<double>(50), iters);
    const double r = 0.5 * (bracket.first + bracket.second);
    h[k] = b * std::exp(-r) / grid.x(k);
  }
  return Profile(grid, std::move(h), rho, c);
}

// ---------------------------------------------------------------- CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_profile_csv(std::ostream& os, const Profile& p) {
  os << "x,h,F\n";
  const auto& F = p.cumulative_nodes();
  for (std::size_t i = 0; i < p.size(); ++i)
    os << format_double(p.grid().x(i)) << ',' << format_double(p.density(i)) << ','
       << format_double(F[i]) << '\n';
}

std::string profile_csv(const Profile& p) {
  std::ostringstream os;
  write_profile_csv(os, p);
  return os.str();
}

Profile read_profile_csv(std::istream& is, double rho) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,h", 0) != 0)
    throw DomainError("profile CSV must start with the header x,h,F");
  std::vector<double> xs, hs;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    double vals[2];
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    for (double& v : vals) {
      const auto res = std::from_chars(ptr, end, v);
      if (res.ec != std::errc()) throw DomainError("bad number on CSV line " + std::to_string(lineno));
      ptr = res.ptr;
      if (ptr < end && *ptr == ',') ++ptr;
    }
    xs.push_back(vals[0]);
    hs.push_back(vals[1]);
  }
  if (xs.size() < 16) throw DomainError("profile CSV has fewer than 16 rows");
  LogGrid grid(xs.front(), xs.back(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(grid.x(i) - xs[i]) > 1e-9 * xs[i])
      throw DomainError("profile CSV nodes are not geometric (row " + std::to_string(i + 2) + ")");
  return Profile(grid, std::move(hs), rho, 0.0).with_refit_tail();
}

}  // namespace smolu
