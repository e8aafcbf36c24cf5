#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/time_grid.h"
#include "chaosflow/sq/second_quant.h"

namespace chaosflow::integrators {

// Gaussian strong random operator: (A phi)_i = (alpha0 phi)_i + sum_j alpha1(phi)(i, j) xi_j
// with alpha1(phi) = sum_a phi_a alpha1[a].
struct Gsro {
  Eigen::MatrixXd alpha0;               // out x in
  std::vector<Eigen::MatrixXd> alpha1;  // in entries, each out x noise

  std::size_t in_dim() const { return alpha1.size(); }
  std::size_t out_dim() const { return static_cast<std::size_t>(alpha0.rows()); }
  std::size_t noise_dim() const { return alpha1.empty() ? 0 : static_cast<std::size_t>(alpha1[0].cols()); }
  void validate() const;
};

// (A phi)(t_i) = int_0^{t_i} phi dw in H coordinates (right endpoint of cell i).
Gsro ito_gsro(const core::TimeGrid& grid);
// Scalar GSRO phi -> int_0^t phi dw (one output coordinate).
Gsro ito_scalar_gsro(const core::TimeGrid& grid, double t);

// A phi for deterministic phi: degree <= 1 chaos per output coordinate.
core::HChaosVector gsro_deterministic(const Gsro& A, std::span<const double> phi, int order = 1);
// A x = alpha0 x + sum_k Lambda B_k, one extended integral per output coordinate.
core::HChaosVector gsro_random(const Gsro& A, const core::HChaosVector& x);

// Gamma(C)A: alpha0 unchanged, alpha1[a] -> alpha1[a] C.
Gsro gamma_gsro(const sq::BoundedOp& C, const Gsro& A);

// moment2 of Gamma(C)(A x) - (Gamma(C)A)(Gamma(C) x).
double intertwine_check(const Gsro& A, const sq::BoundedOp& C, const core::HChaosVector& x);

// gamma = Gamma(C) w on a grid.
class IntegratorProcess {
 public:
  IntegratorProcess(sq::BoundedOp C, core::TimeGrid grid);
  const sq::BoundedOp& op() const { return C_; }
  const core::TimeGrid& grid() const { return grid_; }
  // Degree-1 kernel of gamma(t_i), i = 0..m.
  Eigen::VectorXd path_kernel(std::size_t i) const;
  // Exact E(sum a_k dgamma_k)^2 / sum a_k^2 dt.
  double ratio(std::span<const double> a) const;

 private:
  sq::BoundedOp C_;
  core::TimeGrid grid_;
};

struct IntegratorBound {
  double max_ratio = 0.0;  // over the random step functions
  double sup_ratio = 0.0;  // exact supremum ||C||^2
};

IntegratorBound integrator_bound(const IntegratorProcess& g, std::size_t trials, std::uint64_t seed);

// int_0^t x dgamma for gamma = Gamma(C) w (extended integral); t a grid time.
core::ChaosVector extended_integral_gamma(const sq::BoundedOp& C, const core::HChaosVector& x,
                                          const core::TimeGrid& grid, double t);

// int_0^t (zeta(s) eta - (D zeta(s), e)) e(s) ds with eta = (e, xi); e in H coordinates.
core::ChaosVector projector_integral_closed_form(std::span<const double> e, const core::HChaosVector& zeta,
                                                 const core::TimeGrid& grid, double t);

}  // namespace chaosflow::integrators
