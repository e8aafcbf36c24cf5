#include "chaosflow/core/linalg.h"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <stdexcept>
#include <string>

namespace chaosflow::core {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A, double clamp_tol) {
  if (A.rows() != A.cols()) throw std::invalid_argument("psd_sqrt: matrix must be square");
  const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -clamp_tol) {
      throw std::domain_error("psd_sqrt: matrix is not positive semidefinite (eigenvalue " +
                              std::to_string(ev(i)) + ")");
    }
    ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double operator_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues()(0);
}

}  // namespace chaosflow::core
