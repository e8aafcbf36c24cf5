#pragma once

#include <Eigen/Dense>

namespace chaosflow::core {

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-clamp_tol, 0) are treated as 0; anything more negative throws.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A, double clamp_tol = 1e-10);

// Largest singular value.
double operator_norm(const Eigen::MatrixXd& A);

}  // namespace chaosflow::core
