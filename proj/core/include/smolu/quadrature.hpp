#pragma once

// Closed-form cell rules for integrands that are log-linear (locally a power
// law) in x. Cell coordinates are w in [0, 1] along u = log x, cell length L.

namespace smolu::quad {

// (e^r - 1) / r, i.e. int_0^1 e^{r w} dw.
double exp_ratio0(double r);
// (e^r (r - 1) + 1) / r^2, i.e. int_0^1 w e^{r w} dw.
double exp_ratio1(double r);

// phi1(z) = (1 - e^-z) / z and psi(z) = (1 - e^-z (1 + z)) / z^2.
double phi1(double z);
double psi(double z);

// Integral over a cell of length L of the log-linear interpolant of (f0, f1).
// A cell with a nonpositive endpoint carries nothing.
double loglin_cell(double L, double f0, double f1);

// Same integrand restricted to w in [wa, wb].
double loglin_partial(double L, double f0, double f1, double wa, double wb);

// Log-linear value at fraction w; 0 inside a cell with a nonpositive endpoint.
double loglin_value(double f0, double f1, double w);

struct CellWeights {
  double left = 0.0;
  double right = 0.0;
};

// Weights (wl, wr) with int h g du = wl g0 + wr g1 over a cell of length L,
// h log-linear through (h0, h1) and g linear in u.
CellWeights product_weights(double L, double h0, double h1);

// Gauss-Legendre nodes/weights on [0, 1].
struct GaussRule {
  const double* nodes;
  const double* weights;
  int size;
};
GaussRule gauss_legendre_unit(int order);  // order in {4, 8, 16}

}  // namespace smolu::quad
