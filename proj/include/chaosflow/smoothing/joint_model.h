#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/core/time_grid.h"

namespace chaosflow::smoothing {

// Correlated pair (w1, w2) on a grid: joint noise xi = (xi1, xi2) in R^{2m} with covariance
// S = [[I, V], [V^T, I]].
struct JointModel {
  core::TimeGrid grid{1.0, 1};
  Eigen::MatrixXd V;
  Eigen::MatrixXd S;
  Eigen::MatrixXd S_half;      // symmetric square root
  Eigen::MatrixXd S_inv;       // I + Q
  Eigen::MatrixXd Q;
  Eigen::MatrixXd factor;      // lower Cholesky factor of S
  Eigen::MatrixXd cond_factor; // lower Cholesky factor of I - V V^T

  std::size_t m() const { return grid.cells(); }
};

JointModel build_joint(const Eigen::MatrixXd& V, const core::TimeGrid& grid);

// xi = factor * z with z standard normal.
Eigen::VectorXd sample_noise(const JointModel& model, core::Rng& rng);

struct GaussianLaw {
  Eigen::VectorXd mean;    // of the w1 noise coordinates
  Eigen::MatrixXd factor;  // covariance = factor * factor^T
};

// Law of xi1 given xi2: mean V xi2, covariance I - V V^T.
GaussianLaw conditional_law_w1(const JointModel& model, std::span<const double> xi2);

// E(w1(t_i) | w2) for i = 0..m.
std::vector<double> conditional_mean_path(const JointModel& model, std::span<const double> xi2);

struct VolterraReport {
  bool holds = false;
  double violation = 0.0;       // max |P_t V - P_t V P_t| over grid times (first block row)
  double full_violation = 0.0;  // same for the whole S
};

VolterraReport volterra_check(const JointModel& model, double tol = 1e-12);

// exp{(S^{-1} h, xi) - (S^{-1} h, h)/2} for deterministic h in R^{2m}.
double shift_density(const JointModel& model, std::span<const double> h, std::span<const double> xi);

// Chaos over the standard noise xi' = S^{-1/2} xi (dimension 2m).
// J(x) = I(S^{1/2} x), I the Skorokhod integral in xi'.
core::ChaosVector j_integral(const JointModel& model, const core::HChaosVector& x);
// D_xi a = S^{1/2} D' a and D^F a = S^{-1/2} D' a.
core::HChaosVector d_xi(const JointModel& model, const core::ChaosVector& a);
core::HChaosVector d_frechet(const JointModel& model, const core::ChaosVector& a);

struct SkorokhodResiduals {
  double first = 0.0;   // sqrt moment2 of a J(x) - J(a x) - (x, D_xi a)
  double second = 0.0;  // sqrt moment2 of (D^F J(x), h) - (x, h) - J((D^F x, h))
};

SkorokhodResiduals skorokhod_identities(const core::ChaosVector& a, const core::HChaosVector& x,
                                     std::span<const double> h, const JointModel& model);

}  // namespace chaosflow::smoothing
