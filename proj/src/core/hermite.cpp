#include "chaosflow/core/hermite.h"

#include <cmath>
#include <stdexcept>

namespace chaosflow::core {

double hermite(int k, double x) {
  if (k < 0) throw std::invalid_argument("hermite: negative order");
  if (k == 0) return 1.0;
  double h0 = 1.0;
  double h1 = x;
  for (int n = 1; n < k; ++n) {
    const double h2 = x * h1 - n * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  return std::tgamma(static_cast<double>(n) + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

std::vector<double> hermite_product(int a, int b) {
  if (a < 0 || b < 0) throw std::invalid_argument("hermite_product: negative order");
  std::vector<double> c(static_cast<std::size_t>(a + b + 1), 0.0);
  for (int r = 0; r <= std::min(a, b); ++r) {
    c[static_cast<std::size_t>(a + b - 2 * r)] += factorial(r) * binomial(a, r) * binomial(b, r);
  }
  return c;
}

}  // namespace chaosflow::core
