#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/monte_carlo.h"

namespace chaosflow::sq {

// Matrix acting on the discrete basis, with its cached operator norm.
class BoundedOp {
 public:
  explicit BoundedOp(Eigen::MatrixXd C);

  const Eigen::MatrixXd& matrix() const { return C_; }
  double norm() const { return norm_; }
  std::size_t dim() const { return static_cast<std::size_t>(C_.rows()); }
  // Throws unless norm <= 1 (up to rounding).
  void require_contraction() const;
  // Symmetric PSD square root of I - C C^T.
  Eigen::MatrixXd complement_sqrt() const;

 private:
  Eigen::MatrixXd C_;
  double norm_ = 0.0;
};

BoundedOp identity_op(std::size_t m);
BoundedOp scalar_op(std::size_t m, double c);
// e^{-t} I.
BoundedOp ou_operator(double t, std::size_t m);
// e e^T for a unit vector e.
BoundedOp projector_op(std::span<const double> e);

// Degree-k kernel A -> A(C.,...,C.); gamma_apply(C, wick_exp(phi)) = wick_exp(C^T phi).
core::ChaosVector gamma_apply(const BoundedOp& C, const core::ChaosVector& c);
// Componentwise on the free index.
core::HChaosVector gamma_apply(const BoundedOp& C, const core::HChaosVector& x);

using NoiseFunctional = std::function<double(std::span<const double>)>;
using MultiNoiseFunctional = std::function<void(std::span<const double>, std::span<double>)>;

// Monte Carlo value of Gamma(C)F at xi: average of F(sqrt(I - C C^T) xi' + C xi).
core::Estimate gamma_mc(const BoundedOp& C, const NoiseFunctional& F, std::span<const double> xi, std::size_t n,
                        std::uint64_t seed);
std::vector<core::Estimate> gamma_mc(const BoundedOp& C, std::size_t outputs, const MultiNoiseFunctional& F,
                                     std::span<const double> xi, std::size_t n, std::uint64_t seed);

// Weighted atoms approximating a random probability measure.
class ParticleMeasure {
 public:
  ParticleMeasure(std::vector<double> locations, std::vector<double> weights);
  std::size_t size() const { return loc_.size(); }
  const std::vector<double>& locations() const { return loc_; }
  const std::vector<double>& weights() const { return w_; }
  double pair(const std::function<double(double)>& f) const;

 private:
  std::vector<double> loc_;
  std::vector<double> w_;
};

// Equal-weight atoms X(eta_i), eta_i drawn as in gamma_mc.
ParticleMeasure random_measure(const BoundedOp& C, const NoiseFunctional& X, std::span<const double> xi,
                               std::size_t n, std::uint64_t seed);

}  // namespace chaosflow::sq
