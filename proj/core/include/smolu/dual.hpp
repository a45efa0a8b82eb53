#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"

namespace smolu {

// N(z) = P z^{-1-omega}.
struct PowerLawTerm {
  double prefactor = 1.0;
  double omega = 0.5;
};

// N(z) = h(z)/z [lambda1 (z+eps)^-a + lambda2 (z+eps)^b] for z in (0,1],
// producing a jump of length z/L.
struct ProfileWeightedTerm {
  Profile profile;
  double epsilon = 0.0;
  double L = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double a = 1.0 / 3.0;
  double b = 1.0 / 3.0;
};

using JumpTerm = std::variant<PowerLawTerm, ProfileWeightedTerm>;

struct JumpKernelSpec {
  std::vector<JumpTerm> terms;

  void validate() const;
  // sum P_i Gamma(1-omega_i)/omega_i Z^omega_i over the power-law terms.
  double power_law_exponent(double Z) const;
  // Smallest omega among the power-law terms (1 if there are none).
  double min_omega() const;
};

// delta(. - A) convolved n times with phi_kappa.
struct DeltaMollified {
  double A = 0.0;
  double kappa = 0.01;
  int n = 1;
};

// chi_(-inf, A] convolved n times with phi_kappa. Evolved as its (negative)
// derivative, which is a DeltaMollified density.
struct StepMollified {
  double A = 0.0;
  double kappa = 0.01;
  int n = 1;
};

using JumpInit = std::variant<DeltaMollified, StepMollified>;

// Uniform grid ending exactly at the initial support edge A + n kappa.
struct DualGridOptions {
  std::size_t n = 4096;
  double span = 20.0;
};

struct UniformGrid {
  double xi_min = 0.0;
  double h = 1.0;
  std::size_t n = 0;

  double xi(std::size_t i) const { return xi_min + h * static_cast<double>(i); }
  double xi_max() const { return xi(n - 1); }
};

// Density f(xi, t) on a uniform grid. Mass that jumps below the first node is
// collected there, so node 0 stands for (-inf, xi_min].
struct DualSolution {
  UniformGrid grid;
  std::vector<double> values;
  double A = 0.0;
  double kappa = 0.0;
  int n_mollify = 1;
  double t = 0.0;
  // The represented function is the survival function of values (step data).
  bool step = false;
  double total_mass = 1.0;
  // Largest |mass - 1| seen over all steps.
  double mass_drift = 0.0;
  // Last node with positive density, recorded after every step.
  std::vector<std::size_t> edge_history;
  // Negative round-off removed by clipping, summed over steps.
  double clipped_mass = 0.0;

  double support_edge() const { return A + kappa * n_mollify; }
  double mass() const;
  // Phi(xi_i) = mass at or right of xi_i.
  std::vector<double> survival() const;
  // Density, or its survival function for step data.
  std::vector<double> function_values() const;
  // Phi at an arbitrary point, linear between nodes.
  double survival_at(double xi) const;
};

DualSolution initial_solution(const JumpInit& init, const DualGridOptions& grid = {});

// Fourth-order exponential time differencing on the lattice generator. The
// loss rate is a scalar, so mass is conserved by every step.
class JumpSolver {
 public:
  JumpSolver(const JumpKernelSpec& spec, const UniformGrid& grid);

  // Total jump rate of the lattice generator (jumps of at least one cell plus
  // the drift closure).
  double loss_rate() const { return loss_; }
  // Rate of jumps longer than one cell.
  double jump_rate() const { return jump_rate_; }
  double drift() const { return drift_; }
  const std::vector<double>& bins() const { return g_; }

  using Observer = std::function<void(const DualSolution&)>;
  void advance(DualSolution& sol, double T, int n_steps, const Observer& observer = {}) const;

 private:
  UniformGrid grid_;
  std::vector<double> g_;  // g_[m]: rate of jumps of m cells, m >= 1
  double loss_ = 0.0;
  double jump_rate_ = 0.0;
  double drift_ = 0.0;
};

// Step count keeping dt * loss rate below target.
int suggested_steps(const JumpKernelSpec& spec, const UniformGrid& grid, double T,
                    double target = 0.5);

DualSolution solve_jump(const JumpKernelSpec& spec, const JumpInit& init, double T, int n_steps,
                        const DualGridOptions& grid = {});

// int f e^{Z (xi - edge)} dxi with edge the initial support edge.
double exponential_moment(const DualSolution& sol, double Z);
// int f e^{Z (xi - edge)} over the initial datum, computed on a fine grid.
double mollifier_moment(double kappa, int n, double Z);

// Mass on (-inf, A - D].
double tail_mass(const DualSolution& sol, double D);

struct TailBoundReport {
  std::vector<double> D;
  std::vector<double> mass;
  double slope = 0.0;
  double intercept = 0.0;
  double required = 0.0;  // min(mu, omega) - 0.1
  bool pass = false;
};
TailBoundReport check_tail_bound(const DualSolution& sol, const std::vector<double>& D_list,
                                 double mu, double omega);

// Convolution of two densities with the same spacing, collected nodes
// excluded. The result lives on xi_min_a + xi_min_b + k h.
DualSolution convolve(const DualSolution& a, const DualSolution& b);
// int |f - g| over [lo, hi]; grids must share the spacing.
double l1_distance(const DualSolution& a, const DualSolution& b, double lo, double hi);

struct PhiParams {
  double rho = 0.5;
  double a = 1.0 / 3.0;
  double b = 1.0 / 3.0;
};

JumpKernelSpec phi_kernel(double R, double epsilon, const PhiParams& params, double c0);

// Smallest c0 for which the power laws dominate the profile-weighted kernel,
// c0 = c2 max_i omega_i sup_Z W_i(Z) Z^omega_i, where W_i are tail moments of
// h chi (chi the cutoff factor).
double default_c0(const Profile& p, const KernelSpec& kernel, const RegularizationParams& reg,
                  double rho);

struct DualRun {
  int n_steps = 0;     // 0 picks suggested_steps
  std::size_t n = 4096;
  double span = 0.0;   // 0 picks a span from the problem scales
};

DualSolution build_phi(double R, double kappa, double epsilon, const PhiParams& params, double c0,
                       double T, const DualRun& run = {});

struct WParams {
  double A = 100.0;
  double nu = 0.5;
  double sigma = 0.9;
  double kappa = 0.1;
  double epsilon = 0.05;
  double L = 1.0;
  double c_tilde = 1.0;
  double T = 1.0;
  double rho = 0.5;
  double a = 1.0 / 3.0;
  double b = 1.0 / 3.0;
};

struct WKernelParts {
  PowerLawTerm low;    // omega_1 part
  PowerLawTerm high;   // omega_2 part
  ProfileWeightedTerm near;
  double beta = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
};

WKernelParts w_kernel(const WParams& w, const Profile& profile_eps);
JumpKernelSpec w_kernel_spec(const WParams& w, const Profile& profile_eps);

struct WResult {
  DualSolution w_tilde;
  // W~ on the grid with nodes below A^nu set to zero.
  std::vector<double> w_cut;
  double cut = 0.0;
};

WResult build_w(const WParams& w, const Profile& profile_eps, const DualRun& run = {});
// 1 - W~(A - A^sigma).
double w_deficit(const WResult& w, double A, double sigma);
// -theta as the largest of the decay exponents -mu sigma, -nu a - sigma omega1,
// beta - sigma rho, beta - sigma, -nu a - sigma.
double theta_formula(const WParams& w, double mu);

struct RecursionEntry {
  int k = 0;
  double A = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct RecursionReport {
  double C = 0.0;
  double A0 = 0.0;
  double R_delta = 0.0;
  double delta = 0.1;
  std::vector<RecursionEntry> entries;
  // Every entry with A >= R_delta has margin >= 0.
  bool holds = false;
};

struct RecursionOptions {
  double delta = 0.1;
  double A_max = 1e5;
  int max_iter = 200;
};

// Evaluates F(A) >= -C A^{nu(1-rho)} + F((A - A^sigma) e^T) e^{-(1-rho)T}(1 - C A^-theta)
// along A_{k+1} = e^T (A_k - A_k^sigma). C is the smallest value making the
// first step hold. A0 <= 0 starts from max(R_delta, (a/(a-1))^{1/(1-sigma)}).
RecursionReport verify_recursion(const std::function<double(double)>& F, double rho, double A0,
                                 double sigma, double nu, double theta, double T,
                                 const RecursionOptions& opt = {});
RecursionReport verify_recursion(const Profile& p, double A0, double sigma, double nu,
                                 double theta, double T, const RecursionOptions& opt = {});

// Smallest node R with F(r) >= (1 - delta) r^{1-rho} at every node r >= R.
double measure_r_delta(const Profile& p, double delta);

struct TaylorCheckReport {
  int tuples = 0;
  int samples = 0;
  double worst_slack = 0.0;
  bool holds = false;
};

// Samples the scalar inequality
//   (1 - k/R + xi)^{1-rho} (1 - (R0/R)^d e^{-d t} / (1 - k/R + xi)^d)
//     >= 1 - (R0/R)^d e^{-d t} - |xi - k/R|
// on its admissible xi interval for random (d, rho, k, R, R0, t).
TaylorCheckReport check_taylor_estimate(int tuples = 100, int samples = 200,
                                        std::uint64_t seed = 20240607);

}  // namespace smolu
