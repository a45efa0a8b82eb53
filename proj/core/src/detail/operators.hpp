#pragma once

// Node tables for the loss rate and gain term of the rescaled equation at a
// fixed frame time t. Kernel arguments are taken as (X e^-t, Y e^-t).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"

namespace smolu::detail {

using KernelFn = std::function<double(double, double)>;

// K_eps^lambda bound to a kernel/regularization pair.
KernelFn bind_kernel(const KernelSpec& kernel, const RegularizationParams& reg);

// int_{x_max}^inf K(x, z) z^{-rho} dz / z per unit tail amplitude, with the
// kernel's argument z scaled by `scale`. Zero when the cutoff kills z >= x_max*scale.
double tail_loss_factor(const KernelSpec& kernel, const RegularizationParams& reg, double rho,
                        double x, double x_max, double scale);

// One sample of the symmetrized gain integrand at Y: G = K(Y,Z) X/Z with Z = X - Y
// and the interpolation cell of Z on the grid.
struct GainSample {
  double g = 0.0;
  double z = 0.0;
  std::uint32_t cell = 0;  // cell index of Z; kOutside when Z > x_max
  double frac = 0.0;
  static constexpr std::uint32_t kOutside = std::numeric_limits<std::uint32_t>::max();
};

struct GainRow {
  std::vector<GainSample> nodes;  // Y = x_0 .. x_kmax, all <= X/2
  double tail_frac = 0.0;         // length of [x_kmax, X/2] in cells
  GainSample mid;                 // Y = Z = X/2
  GainSample low;                 // Y -> 0 limit used by the lower closure
  double y_low = 0.0;             // upper end of the closure region
};

class FrameOperators {
 public:
  FrameOperators(const LogGrid& grid, const KernelSpec& kernel, const RegularizationParams& reg,
                 double rho, double frame_time, bool build_tables = true);

  // A0(X_i) = int K/Y H dY at every node (without the -rho shift).
  std::vector<double> loss(const Profile& H) const;
  std::vector<double> gain(const Profile& H) const;
  double loss_at(const Profile& H, double X) const;
  double gain_at(const Profile& H, double X) const;

  double frame_time() const { return t_; }

 private:
  GainRow build_row(double X) const;
  double eval_row(const GainRow& row, const Profile& H, const std::vector<double>& log_h,
                  double X) const;
  double k(double x, double y) const;

  LogGrid grid_;
  KernelSpec kernel_;
  RegularizationParams reg_;
  KernelFn kfn_;
  double rho_;
  double t_;
  double scale_;                 // e^-t
  std::vector<double> kloss_;    // n x n, row-major K(X_i e^-t, Y_j e^-t)
  std::vector<double> tail_;     // per node tail factor
  std::vector<GainRow> rows_;
};

// Per-node product weights W with int H g du ~ sum_j W_j g_j over the grid cells.
std::vector<double> node_weights(const Profile& H);

// LRU cache of frame tables keyed by frame time.
class OperatorCache {
 public:
  OperatorCache(LogGrid grid, KernelSpec kernel, RegularizationParams reg, double rho,
                std::size_t capacity = 8);
  std::shared_ptr<const FrameOperators> at(double frame_time) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace smolu::detail
