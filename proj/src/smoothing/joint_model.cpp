#include "chaosflow/smoothing/joint_model.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chaosflow/core/linalg.h"

namespace chaosflow::smoothing {

JointModel build_joint(const Eigen::MatrixXd& V, const core::TimeGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.cells());
  if (V.rows() != m || V.cols() != m) throw std::invalid_argument("build_joint: V must be m x m");
  if (core::operator_norm(V) >= 1.0) throw std::invalid_argument("build_joint: need ||V|| < 1");
  JointModel model;
  model.grid = grid;
  model.V = V;
  model.S = Eigen::MatrixXd::Identity(2 * m, 2 * m);
  model.S.topRightCorner(m, m) = V;
  model.S.bottomLeftCorner(m, m) = V.transpose();
  model.S_half = core::psd_sqrt(model.S);
  model.S_inv = model.S.inverse();
  model.Q = model.S_inv - Eigen::MatrixXd::Identity(2 * m, 2 * m);
  model.factor = model.S.llt().matrixL();
  const Eigen::MatrixXd cond = Eigen::MatrixXd::Identity(m, m) - V * V.transpose();
  model.cond_factor = cond.llt().matrixL();
  return model;
}

Eigen::VectorXd sample_noise(const JointModel& model, core::Rng& rng) {
  Eigen::VectorXd z(2 * static_cast<Eigen::Index>(model.m()));
  rng.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(z.size())));
  return model.factor * z;
}

GaussianLaw conditional_law_w1(const JointModel& model, std::span<const double> xi2) {
  if (xi2.size() != model.m()) throw std::invalid_argument("conditional_law_w1: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> x2(xi2.data(), static_cast<Eigen::Index>(xi2.size()));
  return {model.V * x2, model.cond_factor};
}

std::vector<double> conditional_mean_path(const JointModel& model, std::span<const double> xi2) {
  const auto law = conditional_law_w1(model, xi2);
  std::vector<double> path(model.m() + 1, 0.0);
  for (std::size_t i = 0; i < model.m(); ++i) {
    path[i + 1] = path[i] + model.grid.sqrt_dt() * law.mean(static_cast<Eigen::Index>(i));
  }
  return path;
}

VolterraReport volterra_check(const JointModel& model, double tol) {
  const auto m = static_cast<Eigen::Index>(model.m());
  VolterraReport r;
  // P_t keeps the coordinates of cells before t in both blocks
  for (Eigen::Index i = 0; i <= m; ++i) {
    for (Eigen::Index a = 0; a < 2 * m; ++a) {
      if ((a % m) >= i) continue;
      for (Eigen::Index b = 0; b < 2 * m; ++b) {
        if ((b % m) < i) continue;
        const double v = std::abs(model.S(a, b));
        r.full_violation = std::max(r.full_violation, v);
        if (a < m && b >= m) r.violation = std::max(r.violation, v);
      }
    }
  }
  r.holds = r.violation <= tol;
  return r;
}

double shift_density(const JointModel& model, std::span<const double> h, std::span<const double> xi) {
  const auto n = static_cast<Eigen::Index>(2 * model.m());
  if (static_cast<Eigen::Index>(h.size()) != n || static_cast<Eigen::Index>(xi.size()) != n) {
    throw std::invalid_argument("shift_density: dimension mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> hv(h.data(), n), xv(xi.data(), n);
  const Eigen::VectorXd g = model.S_inv * hv;
  return std::exp(g.dot(xv) - 0.5 * g.dot(hv));
}

core::ChaosVector j_integral(const JointModel& model, const core::HChaosVector& x) {
  if (x.free_dim() != 2 * model.m() || x.dim() != 2 * model.m()) throw std::invalid_argument("j_integral: dimension mismatch");
  return core::skorokhod(core::apply_free(model.S_half, x));
}

core::HChaosVector d_xi(const JointModel& model, const core::ChaosVector& a) {
  return core::apply_free(model.S_half, core::stoch_derivative(a));
}

core::HChaosVector d_frechet(const JointModel& model, const core::ChaosVector& a) {
  const Eigen::MatrixXd inv_half = model.S_half.inverse();
  return core::apply_free(inv_half, core::stoch_derivative(a));
}

namespace {

core::HChaosVector lift(const core::HChaosVector& x, int order) {
  core::HChaosVector out(x.free_dim(), x.dim(), order);
  for (std::size_t s = 0; s < x.free_dim(); ++s) out[s] = x[s].with_order(order);
  return out;
}

}  // namespace

SkorokhodResiduals skorokhod_identities(const core::ChaosVector& a, const core::HChaosVector& x,
                                     std::span<const double> h, const JointModel& model) {
  if (h.size() != 2 * model.m()) throw std::invalid_argument("skorokhod_identities: dimension mismatch");
  const int ax = std::max(a.max_degree(), 0);
  const int xx = std::max(x.order(), 0);
  // one extra degree for the integral
  const int N = ax + xx + 1;
  const auto A = a.with_order(N);
  const auto X = lift(x, N);
  SkorokhodResiduals r;
  {
    const auto lhs = core::multiply(A, j_integral(model, X), N);
    const auto rhs = j_integral(model, core::multiply(A, X, N)) + core::inner(X, d_xi(model, A), N);
    r.first = std::sqrt(core::moment2(lhs - rhs));
  }
  {
    const auto lhs = core::inner(d_frechet(model, j_integral(model, X)), h);
    // (D^F x, h) = component-wise (D' x_i, S^{-1/2} h)
    const Eigen::Map<const Eigen::VectorXd> hv(h.data(), static_cast<Eigen::Index>(h.size()));
    const Eigen::VectorXd g = model.S_half.inverse() * hv;
    const auto Dxh = core::derivative_along(X, std::span<const double>(g.data(), static_cast<std::size_t>(g.size())));
    auto rhs = core::inner(X, h) + j_integral(model, Dxh);
    r.second = std::sqrt(core::moment2(lhs.with_order(N) - rhs.with_order(N)));
  }
  return r;
}

}  // namespace chaosflow::smoothing
