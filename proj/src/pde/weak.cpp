#include "chaosflow/pde/weak.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace chaosflow::pde {

double wick_pde_residual(const PairedField& U, const core::TimeGrid& grid, std::span<const double> psi,
                         const WeakProblem& problem, std::span<const double> xs, double h) {
  if (psi.size() != grid.cells()) throw std::invalid_argument("wick_pde_residual: psi dimension mismatch");
  if (!(h > 0.0)) throw std::invalid_argument("wick_pde_residual: spacing must be positive");
  const std::size_t m = grid.cells();
  // stencil values (x-h, x, x+h) at every time
  std::vector<std::array<double, 3>> prev(xs.size()), next(xs.size());
  auto fill = [&](std::vector<std::array<double, 3>>& out, std::size_t i) {
    for (std::size_t p = 0; p < xs.size(); ++p) out[p] = {U(xs[p] - h, i), U(xs[p], i), U(xs[p] + h, i)};
  };
  fill(prev, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    fill(next, i + 1);
    const double vel = problem.drift + problem.noise * psi[i] / grid.sqrt_dt();
    for (std::size_t p = 0; p < xs.size(); ++p) {
      auto L = [&](const std::array<double, 3>& u) {
        return 0.5 * problem.diffusion * (u[0] - 2.0 * u[1] + u[2]) / (h * h) + vel * (u[2] - u[0]) / (2.0 * h);
      };
      const double r = (next[p][1] - prev[p][1]) / grid.dt() - 0.5 * (L(prev[p]) + L(next[p]));
      worst = std::max(worst, std::abs(r));
    }
    std::swap(prev, next);
  }
  return worst;
}

}  // namespace chaosflow::pde
