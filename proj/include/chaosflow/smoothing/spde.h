#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaosflow/smoothing/density.h"

namespace chaosflow::smoothing {

struct TestFunction {
  std::function<double(double)> f, df, d2f;
};

// Integrated form of the filtering equation on [0, t] at a point r, given the w2 noise xi2:
// residual = U(r,t) - U(r,0) - (1/2) sum U'' dt - int U' dgamma - sum E(f'(r + w1) (S D p)_1 | w2) dt,
// with U(r,s) = E(f(r + w1(s)) p | w2) and gamma = E(w1 | w2). The gamma integral is the extended
// integral sum sqrt(dt) [zeta_l (V xi2)_l - sum_j V_lj d zeta_l / d xi2_j].
struct FilteringRow {
  double r = 0.0;
  double residual = 0.0;
  double residual_se = 0.0;
  double discretization = 0.0;   // discrete second-order remainder minus (1/2) sum U'' dt
  double corrected = 0.0;        // residual - discretization
  double corrected_se = 0.0;
  double reduced = 0.0;          // residual with the last term replaced by a1(r) sum U' dt
  double reduced_se = 0.0;
  double error_bar = 0.0;        // 3 residual_se + |discretization|
};

std::vector<FilteringRow> filtering_residual(const JointModel& model, const DriftPair& drifts, const TestFunction& f,
                                         std::span<const double> rs, double t, std::span<const double> xi2,
                                         std::size_t n, std::uint64_t seed);

}  // namespace chaosflow::smoothing
