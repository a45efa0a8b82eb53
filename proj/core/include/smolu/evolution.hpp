#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"

namespace smolu {

namespace detail {
class OperatorCache;
}

// H(X, s) on the grid in the rescaled variable X = x e^s, where s is the time
// since the last unrescaling (frame_time). With frame_time == 0 the profile is
// h(x, t) in the original variables.
struct EvolutionState {
  Profile profile;
  double t = 0.0;
  double frame_time = 0.0;
  SelfSimilarParams params;
  RegularizationParams reg;
  KernelSpec kernel;
};

EvolutionState make_state(Profile h0, SelfSimilarParams params, RegularizationParams reg,
                          KernelSpec kernel);

struct PicardOptions {
  double tol = 1e-11;    // on sup X^rho |H_{k+1} - H_k|
  int max_iter = 60;
  double dt_max = 0.05;  // time-quadrature node spacing
};

struct PicardResult {
  EvolutionState state;
  std::vector<double> distances;  // distances[k] = |iterate k+1 - iterate k|
};

using EvolveObserver = std::function<void(const EvolutionState&, int step)>;

// Operator tables are cached per frame time, so one Evolver should be reused
// for many steps on the same grid.
class Evolver {
 public:
  Evolver(const LogGrid& grid, KernelSpec kernel, RegularizationParams reg, SelfSimilarParams params);

  const LogGrid& grid() const { return grid_; }
  const SelfSimilarParams& params() const { return params_; }

  // A[H] (including -rho) and Q[H] at the nodes, at the state's frame time.
  std::vector<double> rate_nodes(const EvolutionState& s) const;
  std::vector<double> gain_nodes(const EvolutionState& s) const;

  // Exponential Euler with A and Q frozen at the step midpoint.
  EvolutionState step_mild(const EvolutionState& s, double dt) const;
  // Fixed point of the mild form on [frame_time, frame_time + T].
  PicardResult picard_solve(const EvolutionState& s, double T, const PicardOptions& opt = {}) const;
  // Back to the original variables x = X e^{-frame_time}.
  EvolutionState unrescale(const EvolutionState& s) const;
  // n_steps Picard subintervals of length T/n_steps, unrescaling after each.
  // A subinterval equal to the grid spacing in log x maps nodes onto nodes.
  EvolutionState evolve(const EvolutionState& s, double T, int n_steps,
                        const PicardOptions& opt = {}, const EvolveObserver& observer = {}) const;

 private:
  LogGrid grid_;
  KernelSpec kernel_;
  RegularizationParams reg_;
  SelfSimilarParams params_;
  std::shared_ptr<detail::OperatorCache> cache_;
};

// Pointwise operators at arbitrary X (no tables).
double op_a(const EvolutionState& s, double X);
double op_q(const EvolutionState& s, double X);

EvolutionState step_mild(const EvolutionState& s, double dt);
PicardResult picard_solve(const EvolutionState& s, double T, const PicardOptions& opt = {});
EvolutionState evolve(const EvolutionState& s, double T, int n_steps, const PicardOptions& opt = {});

}  // namespace smolu
