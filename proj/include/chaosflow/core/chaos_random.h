#pragma once

#include <cmath>
#include <random>

#include "chaosflow/core/hermite.h"

namespace chaosflow::core {

template <class Rng>
ChaosVector random_chaos(std::size_t dim, int order, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  ChaosVector c(dim, order);
  for (int k = 0; k <= order; ++k) {
    const double s = 1.0 / std::sqrt(factorial(k));
    for (double& v : c.coeff(k).values()) v = s * nd(rng);
  }
  return c;
}

}  // namespace chaosflow::core
