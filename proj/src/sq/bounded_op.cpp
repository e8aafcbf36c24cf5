#include <cmath>
#include <stdexcept>
#include <string>

#include "chaosflow/core/linalg.h"
#include "chaosflow/sq/second_quant.h"

namespace chaosflow::sq {

BoundedOp::BoundedOp(Eigen::MatrixXd C) : C_(std::move(C)) {
  if (C_.rows() != C_.cols() || C_.rows() == 0) throw std::invalid_argument("BoundedOp: matrix must be square and nonempty");
  if (!C_.allFinite()) throw std::invalid_argument("BoundedOp: matrix has non-finite entries");
  norm_ = core::operator_norm(C_);
}

void BoundedOp::require_contraction() const {
  if (norm_ > 1.0 + 1e-12) {
    throw std::domain_error("BoundedOp: operator norm " + std::to_string(norm_) + " exceeds 1");
  }
}

Eigen::MatrixXd BoundedOp::complement_sqrt() const {
  require_contraction();
  const auto m = C_.rows();
  return core::psd_sqrt(Eigen::MatrixXd::Identity(m, m) - C_ * C_.transpose());
}

BoundedOp identity_op(std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  return BoundedOp(Eigen::MatrixXd::Identity(n, n));
}

BoundedOp scalar_op(std::size_t m, double c) {
  const auto n = static_cast<Eigen::Index>(m);
  return BoundedOp(c * Eigen::MatrixXd::Identity(n, n));
}

BoundedOp ou_operator(double t, std::size_t m) {
  if (!(t >= 0.0)) throw std::invalid_argument("ou_operator: t must be nonnegative");
  return scalar_op(m, std::exp(-t));
}

BoundedOp projector_op(std::span<const double> e) {
  Eigen::Map<const Eigen::VectorXd> v(e.data(), static_cast<Eigen::Index>(e.size()));
  if (std::abs(v.norm() - 1.0) > 1e-10) throw std::invalid_argument("projector_op: vector must have unit norm");
  return BoundedOp(v * v.transpose());
}

}  // namespace chaosflow::sq
