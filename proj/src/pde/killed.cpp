#include "chaosflow/pde/killed.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chaosflow::pde {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double killed_kernel(double t, double x, double y) {
  if (!(t > 0.0)) throw std::invalid_argument("killed_kernel: t must be positive");
  if (x < 0.0 || y < 0.0) throw std::invalid_argument("killed_kernel: x, y must be nonnegative");
  const double s = std::sqrt(t);
  // e^{-(x-y)^2/2t} (1 - e^{-2xy/t}) avoids cancellation near the boundary
  return normal_pdf((x - y) / s) / s * -std::expm1(-2.0 * x * y / t);
}

double killed_survival(double t, double x) {
  if (!(t > 0.0)) throw std::invalid_argument("killed_survival: t must be positive");
  return std::erf(x / std::sqrt(2.0 * t));
}

}  // namespace chaosflow::pde
