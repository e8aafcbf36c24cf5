#include "chaosflow/integrators/fbm.h"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <stdexcept>

#include "chaosflow/core/quadrature.h"

namespace chaosflow::integrators {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw std::invalid_argument("fbm: Hurst index must lie in (1/2, 1)");
}

}  // namespace

double fbm_constant(double alpha) {
  check_alpha(alpha);
  return std::sqrt(alpha * (2.0 * alpha - 1.0) / boost::math::beta(2.0 - 2.0 * alpha, alpha - 0.5));
}

double fbm_covariance(double alpha, double s, double t) {
  return 0.5 * (std::pow(t, 2 * alpha) + std::pow(s, 2 * alpha) - std::pow(std::abs(t - s), 2 * alpha));
}

FbmKernel::FbmKernel(const FbmSpec& spec) : spec_(spec), c_(fbm_constant(spec.alpha)), e_(spec.alpha - 0.5) {
  if (spec_.refine == 0) throw std::invalid_argument("FbmKernel: refine must be positive");
  if (spec_.quad_order < 2) throw std::invalid_argument("FbmKernel: quadrature order too small");
  const std::size_t mc = spec_.grid.cells();
  const std::size_t mf = noise_cells();
  const double hf = noise_dt();
  const double inv_sqrt = 1.0 / std::sqrt(hf);
  paths_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mc), static_cast<Eigen::Index>(mf));
  for (std::size_t i = 0; i < mc; ++i) {
    const double t = spec_.grid.time(i + 1);
    const std::size_t last = (i + 1) * spec_.refine;
    for (std::size_t j = 0; j < last; ++j) {
      paths_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cell_integral(t, static_cast<double>(j) * hf, static_cast<double>(j + 1) * hf) * inv_sqrt;
    }
  }
}

double FbmKernel::kernel(double t, double s) const {
  if (!(s > 0.0) || !(s < t)) return 0.0;
  // K(t,s) = c s^{1/2-a} int_s^t (u-s)^{a-3/2} u^{a-1/2} du, with v = (u-s)^e
  const double V = std::pow(t - s, e_);
  const double inv_e = 1.0 / e_;
  const auto& q = core::gauss_legendre(spec_.quad_order);
  double acc = 0.0;
  const int panels = 4;
  const double h = V / panels;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double v = h * (p + 0.5 * (q.nodes[k] + 1.0));
      acc += q.weights[k] * std::pow(s + std::pow(v, inv_e), e_);
    }
  }
  acc *= 0.5 * h;
  return c_ / e_ * std::pow(s, -e_) * acc;
}

double FbmKernel::cell_integral(double t, double a, double b) const {
  const auto& q = core::gauss_legendre(spec_.quad_order);
  const double w = b - a;
  double acc = 0.0;
  if (a == 0.0) {
    // s = b y^p removes the s^{-e} singularity
    const double p = 1.0 / (1.0 - e_);
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double y = 0.5 * (q.nodes[k] + 1.0);
      const double s = b * std::pow(y, p);
      acc += 0.5 * q.weights[k] * kernel(t, s) * b * p * std::pow(y, p - 1.0);
    }
  } else if (std::abs(b - t) < 1e-14 * t) {
    // t - s = w y^{1/e} smooths the (t-s)^e behaviour at s = t
    const double p = 1.0 / e_;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double y = 0.5 * (q.nodes[k] + 1.0);
      const double s = t - w * std::pow(y, p);
      acc += 0.5 * q.weights[k] * kernel(t, s) * w * p * std::pow(y, p - 1.0);
    }
  } else {
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double s = a + 0.5 * w * (q.nodes[k] + 1.0);
      acc += 0.5 * w * q.weights[k] * kernel(t, s);
    }
  }
  return acc;
}

Gsro fbm_gsro(const FbmKernel& K) {
  const std::size_t mc = K.spec().grid.cells();
  const auto m = static_cast<Eigen::Index>(mc);
  const auto& P = K.path_kernels();
  Gsro A;
  A.alpha0 = Eigen::MatrixXd::Zero(m, m);
  A.alpha1.assign(mc, Eigen::MatrixXd::Zero(m, P.cols()));
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::RowVectorXd inc = a == 0 ? Eigen::RowVectorXd(P.row(0)) : Eigen::RowVectorXd(P.row(a) - P.row(a - 1));
    for (Eigen::Index i = a; i < m; ++i) A.alpha1[static_cast<std::size_t>(a)].row(i) = inc;
  }
  return A;
}

}  // namespace chaosflow::integrators
