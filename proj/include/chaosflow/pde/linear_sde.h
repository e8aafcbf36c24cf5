#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/time_grid.h"

namespace chaosflow::pde {

// phi(order, x) = d^order phi / dx^order at x.
using SmoothFn = std::function<double(int, double)>;

// Ordered-simplex weights of degree k on [0, t]: value at a sorted cell
// multi-index is prod_c (l_c / sqrt(dt))^{n_c} / n_c!, l_c the overlap of cell c with [0, t].
core::SymmetricTensor simplex_weights(const core::TimeGrid& grid, double t, int k);

// S_k = int over t > t_1 > ... > t_k > 0 of D^k alpha, as chaos, k = 0..deg(alpha).
std::vector<core::ChaosVector> simplex_integrals(const core::ChaosVector& alpha, const core::TimeGrid& grid, double t);

// z(t) for dz = a z dt + i b z dw (extended integral), z(0) = alpha, evaluated at the noise xi.
// Evaluated as e^{at + b^2 t/2 + i b w(t)} alpha(xi - i b 1_{[0,t]}).
std::complex<double> complex_linear_sde(double a, double b, const core::ChaosVector& alpha, const core::TimeGrid& grid,
                                        double t, std::span<const double> xi);

// (Re z, Im z) from sum_k S_k Y(0,t) (-B)^k u with B the generator of i b, Y built cell by cell.
std::array<double, 2> matrix_series_solution(double a, double b, const core::ChaosVector& alpha,
                                             const core::TimeGrid& grid, double t, std::span<const double> xi);

// U(x,t) = sum_k (-1)^k phi^{(k)}(x + w(t)) S_k for dU = U''/2 dt + U' dw, U(x,0) = phi(x) alpha.
double series_solution_cauchy(const SmoothFn& phi, const core::ChaosVector& alpha, const core::TimeGrid& grid, double x,
                              double t, std::span<const double> xi);

// Wick pairing U_psi(x,t) = E[U(x,t) wick_exp(psi)] of the series solution at a fixed t, computed
// exactly up to 1-D Gauss-Hermite quadrature: E[g(w(t)) P] = sum_n E[g^{(n)}(w(t))] P_n(h,...,h).
class CauchyPairing {
 public:
  CauchyPairing(const core::ChaosVector& alpha, const core::TimeGrid& grid, std::span<const double> psi, double t);
  double operator()(const SmoothFn& phi, double x) const;

 private:
  struct Term {
    int order;  // derivative order of phi
    double coef;
  };
  std::vector<Term> terms_;
  double shift_ = 0.0;
  double sd_ = 0.0;
};

double cauchy_wick_pairing(const SmoothFn& phi, const core::ChaosVector& alpha, const core::TimeGrid& grid,
                           std::span<const double> psi, double x, double t);

// Coordinates of 1_{[0,t]} on the grid.
std::vector<double> indicator_coords(const core::TimeGrid& grid, double t);

}  // namespace chaosflow::pde
