#pragma once

#include <cstddef>
#include <vector>

#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"

namespace smolu {

// Coagulation flux I[h](x) = int_0^x h(y) int_{x-y}^inf K(y,z)/z h(z) dz dy across x,
// computed on a log-linear refinement of the profile grid. K is the shifted
// kernel with the lambda cutoff applied (plain shift when lambda == 0).
class FluxEvaluator {
 public:
  FluxEvaluator(const LogGrid& grid, const KernelSpec& kernel, const RegularizationParams& reg,
                double rho, std::size_t oversample = 4);

  // Flux at every node of the profile grid.
  std::vector<double> flux_nodes(const Profile& h) const;
  // Flux at arbitrary x in [x_min, x_max].
  double flux_at(const Profile& h, double x) const;
  // ((1-rho) F + I - x h) / (x h + (1-rho) F) at every node; 0 where both vanish.
  std::vector<double> residual_nodes(const Profile& h) const;
  double residual_at(const Profile& h, double R) const;

  const LogGrid& grid() const { return grid_; }

 private:
  struct Tables;
  Tables build(const Profile& h) const;
  double flux_with(const Tables& tab, double x) const;

  LogGrid grid_;
  LogGrid fine_;
  KernelSpec kernel_;
  RegularizationParams reg_;
  double rho_;
  std::size_t factor_;
  std::vector<double> k_;     // fine x fine kernel table
  std::vector<double> tail_;  // per fine node, tail integral per unit amplitude
};

double coagulation_flux(const Profile& p, const RegularizationParams& reg, const KernelSpec& kernel,
                        double x);
std::vector<double> coagulation_flux_nodes(const Profile& p, const RegularizationParams& reg,
                                           const KernelSpec& kernel);

}  // namespace smolu
