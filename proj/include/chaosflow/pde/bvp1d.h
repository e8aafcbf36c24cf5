#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/core/time_grid.h"
#include "chaosflow/sq/second_quant.h"

namespace chaosflow::pde {

using CoefFn = std::function<double(double)>;

// dx = b(x) dt + sigma(x) dw.
struct Diffusion1d {
  CoefFn drift = [](double) { return 0.0; };
  CoefFn sigma = [](double) { return 1.0; };
};

// Euler-Maruyama with mirror reflection at 0 over the first `cells` cells: x <- |x + b dt + sigma sqrt(dt) xi|.
double reflected_path(double x0, const Diffusion1d& coef, double dt, std::span<const double> xi, std::size_t cells);

// Gamma(C) f(x(t)) at xi for the diffusion reflected at 0 (grid horizon >= t, t a grid time).
core::Estimate reflected_bvp_1d(const sq::BoundedOp& C, const CoefFn& f, const Diffusion1d& coef, double x0, double t,
                                const core::TimeGrid& grid, std::span<const double> xi, std::size_t n,
                                std::uint64_t seed);

// E f(x(t)) for the reflected diffusion: Crank-Nicolson for u_t = sigma^2 u''/2 + b u' on [0, x_max]
// with Neumann conditions at both ends.
double reflected_fd_oracle(const CoefFn& f, const Diffusion1d& coef, double x0, double t, double x_max,
                           std::size_t points, std::size_t steps);

// Q(x, t) = Gamma(C)( int_t^{T ^ tau} f(y) ds + g~(y(T ^ tau)) ) on the interval [0, L].
struct StoppedProblem {
  CoefFn running = [](double) { return 0.0; };  // f
  double g0 = 0.0;                               // g(0)
  double gL = 1.0;                               // g(L)
  double length = 1.0;                           // L
  Diffusion1d coef;
};

// g~ with sigma^2 g~''/2 + b g~' = 0, g~(0) = g0, g~(L) = gL, via the scale function.
class HarmonicExtension {
 public:
  explicit HarmonicExtension(const StoppedProblem& problem, std::size_t nodes = 2001);
  double operator()(double x) const;

 private:
  double L_, g0_, gL_;
  std::vector<double> scale_;  // scale function on a uniform grid, scale_[0] = 0
};

// One path of the survival-weight estimator started at x0 at grid index `start`; exit inside a cell is
// accounted for by the Brownian-bridge crossing probabilities of both ends.
double stopped_path_value(const StoppedProblem& problem, const HarmonicExtension& gt, double x0, std::size_t start,
                          double dt, std::span<const double> xi);

core::Estimate stopped_bvp_1d(const sq::BoundedOp& C, const StoppedProblem& problem, double x0, double t,
                              const core::TimeGrid& grid, std::span<const double> xi, std::size_t n,
                              std::uint64_t seed);

// Q(x0, t) for C = 0 from dQ/ds + sigma^2 Q''/2 + b Q' + f = 0, Q(., T) = g~, Dirichlet g0, gL
// (Crank-Nicolson, marched from T back to t).
double stopped_fd_oracle(const StoppedProblem& problem, double x0, double t, double horizon, std::size_t points,
                         std::size_t steps);

}  // namespace chaosflow::pde
