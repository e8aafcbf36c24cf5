#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/smoothing/joint_model.h"

namespace chaosflow::smoothing {

using CoefFn = std::function<double(double)>;

// dx1 = a1(x1) dt + dw1, dx2 = a2(x1) dt + dw2, with the derivatives a1', a2'.
struct DriftPair {
  CoefFn a1 = [](double) { return 0.0; };
  CoefFn da1 = [](double) { return 0.0; };
  CoefFn a2 = [](double) { return 0.0; };
  CoefFn da2 = [](double) { return 0.0; };
  double slope_bound = 0.0;  // sup(|a1'| + |a2'|)
};

// Paths at grid times t_0..t_m.
struct PairPath {
  std::vector<double> w1, w2, x1, x2;
};

// Paths driven by the joint noise xi = (xi1, xi2); x1 by Euler-Maruyama, x2 by left-point quadrature.
PairPath path_from_noise(const JointModel& model, const DriftPair& drifts, std::span<const double> xi);
PairPath sample_pair(const JointModel& model, const DriftPair& drifts, core::Rng& rng);

// Shift u = sqrt(dt) (a1(w1(t_i)), a2(w1(t_i))) in noise coordinates (left point of each cell).
Eigen::VectorXd drift_shift(const JointModel& model, const DriftPair& drifts, std::span<const double> xi);

// Jacobian du/dxi (2m x 2m); only the xi1 columns are nonzero: du_i/dxi1_j = dt a'(w1(t_i)) 1{j < i}.
Eigen::MatrixXd drift_jacobian(const JointModel& model, const DriftPair& drifts, std::span<const double> xi);

// p = exp{J(S^{-1}u) - (S^{-1}u, u)/2}, J evaluated as (y, xi) - tr(S dy/dxi) for y = S^{-1}u.
// Refuses models that fail volterra_check. E F(x1, x2) = E F(w1, w2) p.
double density_p(const JointModel& model, const DriftPair& drifts, std::span<const double> xi);

// Gradient of log p in xi: S^{-1}u + (du/dxi)^T S^{-1}(xi - u).
Eigen::VectorXd log_density_gradient(const JointModel& model, const DriftPair& drifts, std::span<const double> xi);

// D1x1(t_i)(cell j) for the Euler flow: 1 for j = i - 1, multiplied by (1 + a1'(x1(t_k)) dt) for each later
// step k; zero for cells at or after t_i. Row i is the time t_i, column j the cell.
Eigen::MatrixXd stoch_deriv_x1(const DriftPair& drifts, const core::TimeGrid& grid, std::span<const double> x1);

// ||(S Dh)^n||^{1/n} for n = 1..n_max, with Dh from (a1', a2') at w1 (the first block column).
std::vector<double> quasi_nilpotence(const JointModel& model, const DriftPair& drifts, std::span<const double> w1,
                                     int n_max);

// (||S||^{2n} c^n / n!)^{1/2n} with c = T sup(a1'^2 + a2'^2) <= T slope_bound^2.
std::vector<double> nilpotence_envelope(const JointModel& model, const DriftPair& drifts, int n_max);

// One step of the contraction chain: ||S||^2 c dt.
double contraction_estimate(const JointModel& model, const DriftPair& drifts);

}  // namespace chaosflow::smoothing
