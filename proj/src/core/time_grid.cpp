#include "chaosflow/core/time_grid.h"

#include <cmath>
#include <stdexcept>

namespace chaosflow::core {

TimeGrid::TimeGrid(double horizon, std::size_t cells) : T_(horizon), m_(cells) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
  }
  if (cells == 0) throw std::invalid_argument("TimeGrid: need at least one cell");
  dt_ = T_ / static_cast<double>(m_);
  sqrt_dt_ = std::sqrt(dt_);
}

std::size_t TimeGrid::cells_until(double t) const {
  if (t < -1e-12 || t > T_ * (1.0 + 1e-12)) {
    throw std::invalid_argument("TimeGrid: time outside [0, T]");
  }
  const double r = t / dt_;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-8) throw std::invalid_argument("TimeGrid: time is not a grid point");
  return static_cast<std::size_t>(k);
}

}  // namespace chaosflow::core
