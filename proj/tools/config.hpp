#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "smolu/dual.hpp"
#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"
#include "smolu/stationary.hpp"

namespace smolu::tools {

struct GridConfig {
  double x_min = 1e-4;
  double x_max = 1e4;
  std::size_t n = 512;
};

struct SolverConfig {
  SolveMode mode = SolveMode::Direct;
  double tol = 1e-3;
  double relax = 0.3;
  double T_max = 200.0;
  double dt_max = 0.05;
  int n_steps = 0;  // evolve only: fixed number of subintervals instead of a stationary solve
  double T = 0.0;   // used with n_steps
};

struct SweepConfig {
  std::vector<double> eps_list;
  std::vector<double> lambda_list;
};

struct DualConfig {
  enum class Kind { Jump, Phi };
  Kind kind = Kind::Jump;
  JumpKernelSpec kernel;  // power-law terms only
  bool step = false;      // initial datum: mollified step instead of delta
  double A = 0.0;
  double kappa = 0.01;
  int n_mollify = 1;
  std::vector<double> times = {1.0};
  int steps_per_unit = 200;
  std::size_t n = 4096;
  double span = 20.0;
  std::vector<double> moment_Z = {0.5, 1.0, 2.0, 4.0};
  double oracle_tol = 0.01;
  std::vector<double> tail_D;
  double tail_mu = 0.9;
  // Phi only
  double R = 10.0;
  double phi_epsilon = 0.05;
  double c0 = 1.0;
};

struct OutputConfig {
  std::string dir = "out";
  int dump_every = 0;
};

struct RunConfig {
  KernelSpec kernel;
  RegularizationParams reg;
  double rho = 0.5;
  GridConfig grid;
  InvariantSetSpec invariant;
  SolverConfig solver;
  SweepConfig sweep;
  std::optional<DualConfig> dual;
  OutputConfig output;
  std::vector<int> verify_only;  // acceptance criteria to run; empty means all

  LogGrid make_grid() const { return {grid.x_min, grid.x_max, grid.n}; }
  SelfSimilarParams params() const { return SelfSimilarParams::from_rho(rho, kernel.gamma); }
  StationaryOptions stationary_options() const;
};

// Errors carry "<source>:<line>: " prefixes pointing at the offending key.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace smolu::tools
