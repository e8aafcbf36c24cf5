#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "chaosflow/core/time_grid.h"

namespace chaosflow::pde {

// d_t U = (a/2) U'' + b U' + sigma psi(t) U' for the Wick-paired field U_psi.
struct WeakProblem {
  double diffusion = 1.0;  // a
  double drift = 0.0;      // b
  double noise = 1.0;      // sigma
};

// U_psi(x, t_i) at grid time index i.
using PairedField = std::function<double(double, std::size_t)>;

// Max over x in xs and cells i of the Crank-Nicolson residual
// (U_{i+1} - U_i)/dt - (L_i U_i + L_i U_{i+1})/2, with L_i the generator on cell i (psi constant
// there) and central differences of spacing h.
double wick_pde_residual(const PairedField& U, const core::TimeGrid& grid, std::span<const double> psi,
                         const WeakProblem& problem, std::span<const double> xs, double h);

}  // namespace chaosflow::pde
