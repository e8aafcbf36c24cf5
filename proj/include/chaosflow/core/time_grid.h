#pragma once

#include <cstddef>

namespace chaosflow::core {

// Uniform grid on [0, T]; cell j (0-based) covers [j*dt, (j+1)*dt).
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t cells);

  double horizon() const { return T_; }
  std::size_t cells() const { return m_; }
  double dt() const { return dt_; }
  double sqrt_dt() const { return sqrt_dt_; }
  double time(std::size_t i) const { return static_cast<double>(i) * dt_; }

  // Number of whole cells inside [0, t]; t must be a grid time within tolerance.
  std::size_t cells_until(double t) const;

 private:
  double T_;
  std::size_t m_;
  double dt_;
  double sqrt_dt_;
};

}  // namespace chaosflow::core
