#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/core/time_grid.h"
#include "chaosflow/pde/bvp3.h"
#include "chaosflow/sq/second_quant.h"

namespace chaosflow::pde {

// P(tau <= t) for Brownian motion started at x > 0, tau the hitting time of 0.
double first_passage_probability(double x, double t);

// P(tau <= t | grid increments) for the path x + sqrt(dt) sum xi over the first `cells` cells:
// Brownian-bridge crossing probability exp(-2ab/dt) per cell.
double hit_probability_given_path(double x, double dt, std::span<const double> xi, std::size_t cells);

enum class HittingMethod { MonteCarlo, Series };

struct HittingOptions {
  std::size_t cells = 64;              // noise cells on [0, T]
  double horizon = 0.0;                // T; 0 means 2t
  std::size_t samples = 100000;        // route (a)
  std::uint64_t seed = 1;
  std::vector<double> widths{0.2, 0.1};  // mollifier widths eps for route (b)
  double h = 0.01;                     // route (b) spatial step
  std::size_t steps = 100;             // route (b) time steps
  int depth = 30;                      // route (b) Hermite depth K
  double pad = 7.0;                    // x_max = max x + pad sqrt(t)
};

struct HittingResult {
  double value = 0.0;
  double error = 0.0;        // route (a): standard error; route (b): extrapolation correction + series tail
  std::vector<double> raw;   // route (b): value per mollifier width
};

// Smoothed indicator of {y > 0}: 1 - exp(-(y/eps)^3), with f(0) = f''(0) = 0.
double mollified_indicator(double y, double eps);

// Route (b) for C = e (x) e, e = 1_{[0,T]}/sqrt(T): P(tau_x <= t | eta) = 1 - V(x, 0, eta) with V from
// bvp3_solve on mollified indicators, Richardson-extrapolated in eps^2. One solve serves every x <= x_max.
class HittingSeries {
 public:
  HittingSeries(double t, double x_max, const HittingOptions& options);
  HittingResult operator()(double x, double eta) const;
  double horizon() const { return T_; }

 private:
  double t_;
  double T_;
  std::vector<double> widths_;
  std::vector<HermiteSeriesField> fields_;
};

// Route (a): gamma_mc of hit_probability_given_path on the grid (horizon T, t a grid time).
core::Estimate hitting_mc(double x, double t, const sq::BoundedOp& C, const core::TimeGrid& grid,
                          std::span<const double> xi, std::size_t n, std::uint64_t seed);

// Gamma(C) 1{tau_x <= t} at xi. The series route requires C to be the projector on the constant unit
// vector of the grid and reads eta = (e, xi).
HittingResult hitting_functional(double x, double t, const sq::BoundedOp& C, HittingMethod method,
                                 std::span<const double> xi, const HittingOptions& options = {});

// Conditional hitting probability P(x + w2 = w1 before t | w1) with independent w2, estimated by direct
// simulation of w2 on the grid of w1 (inc1 are the raw increments of w1).
core::Estimate two_path_hitting_mc(double x, double t, const core::TimeGrid& grid, std::span<const double> inc1,
                                   std::size_t n, std::uint64_t seed);

}  // namespace chaosflow::pde
