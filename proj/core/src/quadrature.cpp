#include "smolu/quadrature.hpp"

#include <array>
#include <cmath>

#include "smolu/error.hpp"

namespace smolu::quad {

double exp_ratio0(double r) {
  if (std::abs(r) < 1e-5) return 1.0 + r * (0.5 + r / 6.0);
  return std::expm1(r) / r;
}

double exp_ratio1(double r) {
  if (std::abs(r) < 0.05)
    return 0.5 + r * (1.0 / 3.0 + r * (1.0 / 8.0 + r * (1.0 / 30.0 + r * (1.0 / 144.0 + r * (1.0 / 840.0 + r / 5760.0)))));
  return (std::exp(r) * (r - 1.0) + 1.0) / (r * r);
}

double phi1(double z) {
  if (std::abs(z) < 1e-4) return 1.0 - z / 2.0 + z * z / 6.0;
  return -std::expm1(-z) / z;
}

double psi(double z) {
  if (std::abs(z) < 0.05)
    return 0.5 - z * (1.0 / 3.0 - z * (1.0 / 8.0 - z * (1.0 / 30.0 - z * (1.0 / 144.0 - z * (1.0 / 840.0 - z / 5760.0)))));
  return (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
}

double loglin_cell(double L, double f0, double f1) {
  if (!(f0 > 0.0) || !(f1 > 0.0)) return 0.0;
  return L * f0 * exp_ratio0(std::log(f1 / f0));
}

double loglin_partial(double L, double f0, double f1, double wa, double wb) {
  if (!(f0 > 0.0) || !(f1 > 0.0) || !(wb > wa)) return 0.0;
  const double r = std::log(f1 / f0);
  // int_wa^wb e^{r w} dw = e^{r wa} (wb - wa) E0(r (wb - wa))
  return L * f0 * std::exp(r * wa) * (wb - wa) * exp_ratio0(r * (wb - wa));
}

double loglin_value(double f0, double f1, double w) {
  if (w <= 0.0) return f0;
  if (w >= 1.0) return f1;
  if (!(f0 > 0.0) || !(f1 > 0.0)) return 0.0;
  return f0 * std::exp(w * std::log(f1 / f0));
}

CellWeights product_weights(double L, double h0, double h1) {
  if (!(h0 > 0.0) || !(h1 > 0.0)) return {};
  const double r = std::log(h1 / h0);
  const double e0 = exp_ratio0(r);
  const double e1 = exp_ratio1(r);
  return {L * h0 * (e0 - e1), L * h0 * e1};
}

namespace {
constexpr std::array<double, 4> kN4 = {0.06943184420297371, 0.33000947820757187,
                                       0.6699905217924281, 0.9305681557970262};
constexpr std::array<double, 4> kW4 = {0.17392742256872692, 0.32607257743127305,
                                       0.32607257743127305, 0.17392742256872692};
constexpr std::array<double, 8> kN8 = {0.019855071751231856, 0.10166676129318664,
                                       0.2372337950418355,   0.4082826787521751,
                                       0.5917173212478249,   0.7627662049581645,
                                       0.8983332387068134,   0.9801449282487681};
constexpr std::array<double, 8> kW8 = {0.05061426814518813, 0.11119051722668724,
                                       0.15685332293894363, 0.18134189168918099,
                                       0.18134189168918099, 0.15685332293894363,
                                       0.11119051722668724, 0.05061426814518813};
constexpr std::array<double, 16> kN16 = {
    0.005299532504175031, 0.0277124884633837,  0.06718439880608412, 0.1222977958224985,
    0.19106187779867811,  0.2709916111713863,  0.35919822461037054, 0.4524937450811813,
    0.5475062549188188,   0.6408017753896295,  0.7290083888286136,  0.8089381222013219,
    0.8777022041775016,   0.9328156011939159,  0.9722875115366163,  0.994700467495825};
constexpr std::array<double, 16> kW16 = {
    0.013576229705877048, 0.031126761969323945, 0.04757925584124639, 0.06231448562776694,
    0.07479799440828837,  0.08457825969750127,  0.09130170752246179, 0.0947253052275342,
    0.0947253052275342,   0.09130170752246179,  0.08457825969750127, 0.07479799440828837,
    0.06231448562776694,  0.04757925584124639,  0.031126761969323945, 0.013576229705877048};
}  // namespace

GaussRule gauss_legendre_unit(int order) {
  switch (order) {
    case 4: return {kN4.data(), kW4.data(), 4};
    case 8: return {kN8.data(), kW8.data(), 8};
    case 16: return {kN16.data(), kW16.data(), 16};
    default: throw DomainError("gauss_legendre_unit supports orders 4, 8, 16");
  }
}

}  // namespace smolu::quad
