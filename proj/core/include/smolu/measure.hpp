#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "smolu/kernel.hpp"

namespace smolu {

// Geometric grid x_i = x_min (x_max/x_min)^{i/(n-1)}, i = 0..n-1.
class LogGrid {
 public:
  LogGrid() = default;
  LogGrid(double x_min, double x_max, std::size_t n);

  std::size_t size() const { return x_.size(); }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double du() const { return du_; }
  double x(std::size_t i) const { return x_[i]; }
  double u(std::size_t i) const { return u0_ + du_ * static_cast<double>(i); }
  const std::vector<double>& nodes() const { return x_; }
  // Fractional node index of x (log coordinates), unclamped.
  double position(double x) const;
  // Grid with (n-1)*factor+1 nodes over the same range; every old node is kept.
  LogGrid refined(std::size_t factor) const;

  bool operator==(const LogGrid& o) const {
    return x_min_ == o.x_min_ && x_max_ == o.x_max_ && x_.size() == o.x_.size();
  }

 private:
  double x_min_ = 0.0;
  double x_max_ = 0.0;
  double u0_ = 0.0;
  double du_ = 0.0;
  std::vector<double> x_;
};

// Density h on a LogGrid, geometric between positive nodes. A cell with a zero
// endpoint carries no mass. Below x_min the density continues as the power
// law h_0 (x/x_min)^s0 with s0 = max(first-cell slope, -rho); above x_max it is
// tail_amplitude * x^-rho.
class Profile {
 public:
  Profile() = default;
  Profile(LogGrid grid, std::vector<double> density, double rho, double tail_amplitude);

  static Profile power_law(const LogGrid& grid, double rho, double amplitude);
  static Profile from_function(const LogGrid& grid, double rho,
                               const std::function<double(double)>& h, double tail_amplitude);

  const LogGrid& grid() const { return grid_; }
  const std::vector<double>& density() const { return h_; }
  double density(std::size_t i) const { return h_[i]; }
  std::size_t size() const { return h_.size(); }
  double rho() const { return rho_; }
  double tail_amplitude() const { return tail_; }

  // Interpolated density including both closures.
  double value(double x) const;
  // F at the nodes, including the mass of the lower closure.
  const std::vector<double>& cumulative_nodes() const { return F_; }
  double lower_slope() const { return s0_; }
  double lower_mass() const { return lower_mass_; }
  double cell_mass(std::size_t i) const;

  Profile with_density(std::vector<double> density) const;
  Profile with_tail_amplitude(double c) const;
  Profile scaled(double s) const;
  // Least-squares amplitude of c x^-rho over the top `decades` of the grid.
  double fit_tail_amplitude(double decades = 1.0) const;
  Profile with_refit_tail(double decades = 1.0) const;

  // int_lo^hi h(x) g(x) dx with Gauss-Legendre in log x on every cell piece.
  double weighted_integral(const std::function<double(double)>& g, double lo, double hi,
                           int order = 8) const;

 private:
  void build();

  LogGrid grid_;
  std::vector<double> h_;
  double rho_ = 0.5;
  double tail_ = 0.0;
  double s0_ = 0.0;
  double lower_mass_ = 0.0;
  std::vector<double> F_;
};

struct InvariantSetSpec {
  double r0 = 1.0;
  double delta = 0.5;
  void validate() const;
};

struct SelfSimilarParams {
  double rho = 0.5;
  double gamma = 0.0;
  double beta = 2.0;
  double alpha = 3.0;

  // beta and alpha follow from rho = gamma + 1/beta and alpha = 1 + (1+gamma) beta.
  static SelfSimilarParams from_rho(double rho, double gamma);
};

// Throws AdmissibilityError unless max(b,0) < rho < 1 and rho + a > 0.
void check_admissible(double rho, const KernelSpec& kernel);

double cumulative(const Profile& p, double R);
double norm_rho(const Profile& p);
// int_lo^hi x^alpha h dx; hi may be +inf (needs alpha < rho - 1).
double moment(const Profile& p, double alpha, double lo, double hi);

struct MomentBoundEntry {
  double alpha;
  double D;
  double integral;
  double bound;
  double ratio;  // integral / bound
  bool pass;
};

struct MomentBoundReport {
  double norm = 0.0;
  std::vector<MomentBoundEntry> entries;
  bool all_pass = true;
};

// Dyadic constant of the near-origin bound (alpha > rho - 1).
double moment_bound_constant(double alpha, double rho);
// Constant of the mirrored tail bound int_D^inf x^alpha h <= C |h| D^{1-rho+alpha}
// (alpha < rho - 1).
double tail_moment_bound_constant(double alpha, double rho);

MomentBoundReport check_moment_bounds(const Profile& p, const std::vector<double>& alphas,
                                      const std::vector<double>& D_list);

struct MembershipReport {
  bool holds = true;
  double worst_margin = 0.0;  // min over r of the normalized slack
  double worst_r = 0.0;
};

MembershipReport check_f1(const Profile& p, double tol = 1e-3);
MembershipReport check_f2(const Profile& p, const InvariantSetSpec& spec, double tol = 1e-3);
bool satisfies_f1(const Profile& p, double tol = 1e-3);
bool satisfies_f2(const Profile& p, const InvariantSetSpec& spec, double tol = 1e-3);

// (1-rho) x^-rho on [R0, inf), zero below. The node just below R0 is set so
// that its cell holds exactly the mass of [R0, next node].
Profile seed_profile(const SelfSimilarParams& params, const InvariantSetSpec& spec,
                     const LogGrid& grid);

// CSV with header "x,h,F", shortest round-trip decimals, LF endings.
void write_profile_csv(std::ostream& os, const Profile& p);
std::string profile_csv(const Profile& p);
// Rebuilds a profile from CSV written by write_profile_csv; the tail amplitude
// is refit from the last decade.
Profile read_profile_csv(std::istream& is, double rho);

// Shortest decimal representation that round-trips.
std::string format_double(double v);

}  // namespace smolu
