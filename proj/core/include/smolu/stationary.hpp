#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smolu/evolution.hpp"
#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"

namespace smolu {

// Signed relative residual of (1-rho) F(R) + I[h](R) - R h(R) = 0.
double stationary_residual(const Profile& p, const RegularizationParams& reg,
                           const KernelSpec& kernel, double R);
// Residual at every grid node, and its maximum modulus.
std::vector<double> stationary_residual_nodes(const Profile& p, const RegularizationParams& reg,
                                              const KernelSpec& kernel, std::size_t oversample = 4);
double max_abs(const std::vector<double>& v);

enum class DirectScheme {
  Characteristic,  // downward sweep along x h' = (A0 - rho) h - Q
  Flux,            // h <- (I[h] + (1-rho) F) / x
};

struct StationaryOptions {
  double tol = 1e-3;          // max |relative residual|
  double change_tol = 1e-8;   // evolve: sup relative change per subinterval
  double T_max = 200.0;       // evolve: rescaled time budget
  int check_every = 25;       // evolve: subintervals between residual checks
  PicardOptions picard;
  std::size_t oversample = 4; // flux refinement used by the residual
  double relax = 0.3;         // direct: damping
  double sweep_tol = 1e-10;   // direct: sup relative change between sweeps
  int max_sweeps = 20000;
  DirectScheme scheme = DirectScheme::Characteristic;
  bool fallback = true;       // direct: fall back to evolve on divergence
  int dump_every = 0;
  EvolveObserver observer;    // called every dump_every subintervals
};

struct StationaryResult {
  Profile profile;
  double residual = 0.0;               // max |relative residual|
  std::vector<double> residual_trace;  // evolve: residual at every check
  std::vector<double> change_trace;    // direct: sweep changes; evolve: at every check
  double t = 0.0;                      // evolve: rescaled time used
  int iterations = 0;                  // subintervals or sweeps
  std::string method;                  // "evolve", "direct", "direct->evolve"
};

StationaryResult solve_stationary_evolve(const SelfSimilarParams& params,
                                         const RegularizationParams& reg, const KernelSpec& kernel,
                                         const LogGrid& grid, const InvariantSetSpec& spec,
                                         const StationaryOptions& opt = {},
                                         const std::optional<Profile>& start = std::nullopt);

StationaryResult solve_stationary_direct(const SelfSimilarParams& params,
                                         const RegularizationParams& reg, const KernelSpec& kernel,
                                         const LogGrid& grid, const StationaryOptions& opt = {},
                                         const std::optional<Profile>& start = std::nullopt);

enum class SolveMode { Evolve, Direct };

StationaryResult solve_stationary(SolveMode mode, const SelfSimilarParams& params,
                                  const RegularizationParams& reg, const KernelSpec& kernel,
                                  const LogGrid& grid, const InvariantSetSpec& spec,
                                  const StationaryOptions& opt = {},
                                  const std::optional<Profile>& start = std::nullopt);

// int_lo^hi |h1 - h2| dx / int_lo^hi h2 dx over the grid nodes in [lo, hi].
double weighted_l1(const Profile& h1, const Profile& h2, double lo = 1.0, double hi = 100.0);

struct SweepEntry {
  double epsilon = 0.0;
  double lambda = 0.0;
  StationaryResult result;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  Profile limit;                      // last profile of the sweep
  std::vector<double> cauchy;         // weighted_l1 between consecutive profiles
  double limit_residual = 0.0;        // max residual of the limit under the unshifted kernel
};

// Solves for each (eps, lambda), warm-starting from the previous profile.
// lambda_list may hold one value for all entries.
SweepResult epsilon_sweep(const SelfSimilarParams& params, const KernelSpec& kernel,
                          const LogGrid& grid, const std::vector<double>& eps_list,
                          const std::vector<double>& lambda_list, const InvariantSetSpec& spec,
                          const StationaryOptions& opt = {}, double transition_width_ratio = 0.5,
                          SolveMode mode = SolveMode::Evolve);

}  // namespace smolu
