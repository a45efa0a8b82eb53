#include "detail/operators.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <mutex>
#include <utility>

#include "smolu/parallel.hpp"
#include "smolu/quadrature.hpp"

namespace smolu::detail {

namespace {
constexpr double kSnap = 1e-9;

struct CellSplit {
  std::vector<double> left, right;
};

CellSplit cell_weights(const Profile& H) {
  const std::size_t n = H.size();
  CellSplit w{std::vector<double>(n - 1), std::vector<double>(n - 1)};
  const double L = H.grid().du();
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const auto pw = quad::product_weights(L, H.density(c), H.density(c + 1));
    w.left[c] = pw.left;
    w.right[c] = pw.right;
  }
  return w;
}

std::vector<double> log_density(const Profile& H) {
  std::vector<double> out(H.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = H.density(i) > 0.0 ? std::log(H.density(i)) : -INFINITY;
  return out;
}

double sample_value(const GainSample& s, const Profile& H, const std::vector<double>& log_h) {
  if (s.cell == GainSample::kOutside) return H.value(s.z);
  const std::size_t c = s.cell;
  if (s.frac < kSnap) return H.density(c);
  if (s.frac > 1.0 - kSnap) return H.density(c + 1);
  const double a = H.density(c), b = H.density(c + 1);
  if (!(a > 0.0) || !(b > 0.0)) return 0.0;
  return std::exp(log_h[c] + s.frac * (log_h[c + 1] - log_h[c]));
}

// closure mass int_0^y H du below x_min; zero unless the closure slope is positive
double lower_u_mass(const Profile& H, double y) {
  const double s0 = H.lower_slope();
  if (!(H.density(0) > 0.0) || !(s0 > 0.0)) return 0.0;
  return H.density(0) * std::pow(y / H.grid().x_min(), s0) / s0;
}
}  // namespace

KernelFn bind_kernel(const KernelSpec& kernel, const RegularizationParams& reg) {
  return [kernel, reg](double x, double y) { return eval_cutoff(kernel, reg, x, y); };
}

double tail_loss_factor(const KernelSpec& kernel, const RegularizationParams& reg, double rho,
                        double x, double x_max, double scale) {
  if (x_max * scale >= cutoff_upper_zero(reg)) return 0.0;
  const double chi = cutoff_factor(reg, x);
  if (chi == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& term : power_terms(kernel)) {
    if (!(rho > term.q)) continue;
    sum += term.coef * std::pow(x + reg.epsilon, term.p) * std::pow(scale, term.q) *
           std::pow(x_max, term.q - rho) / (rho - term.q);
  }
  return chi * sum;
}

std::vector<double> node_weights(const Profile& H) {
  const auto w = cell_weights(H);
  std::vector<double> W(H.size(), 0.0);
  for (std::size_t c = 0; c + 1 < H.size(); ++c) {
    W[c] += w.left[c];
    W[c + 1] += w.right[c];
  }
  return W;
}

FrameOperators::FrameOperators(const LogGrid& grid, const KernelSpec& kernel,
                               const RegularizationParams& reg, double rho, double frame_time,
                               bool build_tables)
    : grid_(grid),
      kernel_(kernel),
      reg_(reg),
      kfn_(bind_kernel(kernel, reg)),
      rho_(rho),
      t_(frame_time),
      scale_(std::exp(-frame_time)) {
  if (!build_tables) return;
  const std::size_t n = grid_.size();
  kloss_.assign(n * n, 0.0);
  tail_.assign(n, 0.0);
  rows_.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const double X = grid_.x(i);
    for (std::size_t j = 0; j < n; ++j) kloss_[i * n + j] = k(X, grid_.x(j));
    tail_[i] = tail_loss_factor(kernel_, reg_, rho_, X * scale_, grid_.x_max(), scale_);
    rows_[i] = build_row(X);
  });
}

double FrameOperators::k(double x, double y) const { return kfn_(x * scale_, y * scale_); }

GainRow FrameOperators::build_row(double X) const {
  GainRow row;
  const std::size_t n = grid_.size();
  auto sample = [&](double Y) {
    GainSample s;
    s.z = X - Y;
    s.g = k(Y, s.z) * X / s.z;
    if (s.z > grid_.x_max() * (1.0 + 1e-12)) {
      s.cell = GainSample::kOutside;
      return s;
    }
    const double p = std::max(grid_.position(s.z), 0.0);
    const auto c = static_cast<std::size_t>(std::min(std::floor(p), static_cast<double>(n - 2)));
    s.cell = static_cast<std::uint32_t>(c);
    s.frac = std::min(p - static_cast<double>(c), 1.0);
    return s;
  };
  const double half = 0.5 * X;
  const double ph = grid_.position(half);
  row.mid = sample(half);
  if (ph < -kSnap) {
    row.y_low = half;
    row.low = sample(half);
    return row;
  }
  auto kmax = static_cast<std::size_t>(std::floor(ph + kSnap));
  kmax = std::min(kmax, n - 1);
  row.tail_frac = ph - static_cast<double>(kmax);
  if (row.tail_frac < kSnap) row.tail_frac = 0.0;
  row.nodes.reserve(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) row.nodes.push_back(sample(grid_.x(k)));
  row.y_low = grid_.x_min();
  row.low = row.nodes.front();
  return row;
}

double FrameOperators::eval_row(const GainRow& row, const Profile& H,
                                const std::vector<double>& log_h, double X) const {
  const double L = grid_.du();
  double sum = 0.0;
  const std::size_t m = row.nodes.size();
  if (m > 0) {
    double prev = row.nodes[0].g * sample_value(row.nodes[0], H, log_h);
    for (std::size_t c = 0; c + 1 < m; ++c) {
      const double next = row.nodes[c + 1].g * sample_value(row.nodes[c + 1], H, log_h);
      const auto pw = quad::product_weights(L, H.density(c), H.density(c + 1));
      sum += pw.left * prev + pw.right * next;
      prev = next;
    }
    if (row.tail_frac > 0.0) {
      const double hmid = H.value(0.5 * X);
      const auto pw = quad::product_weights(row.tail_frac * L, H.density(m - 1), hmid);
      sum += pw.left * prev + pw.right * row.mid.g * hmid;
    }
  }
  const double mass = lower_u_mass(H, row.y_low);
  if (mass > 0.0) sum += mass * row.low.g * sample_value(row.low, H, log_h);
  return sum;
}

std::vector<double> FrameOperators::loss(const Profile& H) const {
  const std::size_t n = grid_.size();
  const auto W = node_weights(H);
  const double low = lower_u_mass(H, grid_.x_min());
  const double c = H.tail_amplitude();
  std::vector<double> A(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const double* row = &kloss_[i * n];
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * W[j];
    if (low > 0.0) s += row[0] * low;
    A[i] = s + c * tail_[i];
  });
  return A;
}

std::vector<double> FrameOperators::gain(const Profile& H) const {
  const std::size_t n = grid_.size();
  const auto log_h = log_density(H);
  std::vector<double> Q(n, 0.0);
  parallel_for(n, [&](std::size_t i) { Q[i] = eval_row(rows_[i], H, log_h, grid_.x(i)); });
  return Q;
}

double FrameOperators::loss_at(const Profile& H, double X) const {
  const std::size_t n = grid_.size();
  const auto W = node_weights(H);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += k(X, grid_.x(j)) * W[j];
  const double low = lower_u_mass(H, grid_.x_min());
  if (low > 0.0) s += k(X, grid_.x_min()) * low;
  return s + H.tail_amplitude() * tail_loss_factor(kernel_, reg_, rho_, X * scale_, grid_.x_max(), scale_);
}

double FrameOperators::gain_at(const Profile& H, double X) const {
  const auto log_h = log_density(H);
  return eval_row(build_row(X), H, log_h, X);
}

struct OperatorCache::Impl {
  LogGrid grid;
  KernelSpec kernel;
  RegularizationParams reg;
  double rho;
  std::size_t capacity;
  std::mutex mutex;
  std::list<std::pair<double, std::shared_ptr<const FrameOperators>>> entries;
};

OperatorCache::OperatorCache(LogGrid grid, KernelSpec kernel, RegularizationParams reg, double rho,
                             std::size_t capacity)
    : impl_(std::make_shared<Impl>()) {
  impl_->grid = std::move(grid);
  impl_->kernel = std::move(kernel);
  impl_->reg = reg;
  impl_->rho = rho;
  impl_->capacity = std::max<std::size_t>(capacity, 1);
}

std::shared_ptr<const FrameOperators> OperatorCache::at(double t) const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  auto& e = impl_->entries;
  for (auto it = e.begin(); it != e.end(); ++it) {
    if (std::abs(it->first - t) <= 1e-13 * std::max(1.0, std::abs(t))) {
      e.splice(e.begin(), e, it);
      return e.front().second;
    }
  }
  auto ops = std::make_shared<const FrameOperators>(impl_->grid, impl_->kernel, impl_->reg,
                                                    impl_->rho, t);
  e.emplace_front(t, ops);
  if (e.size() > impl_->capacity) e.pop_back();
  return ops;
}

}  // namespace smolu::detail
