#include "chaosflow/smoothing/density.h"

#include <cmath>
#include <stdexcept>

#include "chaosflow/core/hermite.h"
#include "chaosflow/core/linalg.h"

namespace chaosflow::smoothing {

namespace {

void check_noise(const JointModel& model, std::span<const double> xi) {
  if (xi.size() != 2 * model.m()) throw std::invalid_argument("smoothing: noise must have 2m coordinates");
}

std::vector<double> w1_path(const JointModel& model, std::span<const double> xi) {
  std::vector<double> w(model.m() + 1, 0.0);
  for (std::size_t i = 0; i < model.m(); ++i) w[i + 1] = w[i] + model.grid.sqrt_dt() * xi[i];
  return w;
}

}  // namespace

PairPath path_from_noise(const JointModel& model, const DriftPair& drifts, std::span<const double> xi) {
  check_noise(model, xi);
  const std::size_t m = model.m();
  const double dt = model.grid.dt();
  const double sd = model.grid.sqrt_dt();
  PairPath p;
  p.w1.assign(m + 1, 0.0);
  p.w2.assign(m + 1, 0.0);
  p.x1.assign(m + 1, 0.0);
  p.x2.assign(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double d1 = sd * xi[i];
    const double d2 = sd * xi[m + i];
    p.w1[i + 1] = p.w1[i] + d1;
    p.w2[i + 1] = p.w2[i] + d2;
    p.x1[i + 1] = p.x1[i] + drifts.a1(p.x1[i]) * dt + d1;
    p.x2[i + 1] = p.x2[i] + drifts.a2(p.x1[i]) * dt + d2;
  }
  return p;
}

PairPath sample_pair(const JointModel& model, const DriftPair& drifts, core::Rng& rng) {
  const Eigen::VectorXd xi = sample_noise(model, rng);
  return path_from_noise(model, drifts, std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
}

Eigen::VectorXd drift_shift(const JointModel& model, const DriftPair& drifts, std::span<const double> xi) {
  check_noise(model, xi);
  const auto m = static_cast<Eigen::Index>(model.m());
  const auto w = w1_path(model, xi);
  const double sd = model.grid.sqrt_dt();
  Eigen::VectorXd u(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    u(i) = sd * drifts.a1(w[static_cast<std::size_t>(i)]);
    u(m + i) = sd * drifts.a2(w[static_cast<std::size_t>(i)]);
  }
  return u;
}

Eigen::MatrixXd drift_jacobian(const JointModel& model, const DriftPair& drifts, std::span<const double> xi) {
  check_noise(model, xi);
  const auto m = static_cast<Eigen::Index>(model.m());
  const auto w = w1_path(model, xi);
  const double dt = model.grid.dt();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double g1 = dt * drifts.da1(w[static_cast<std::size_t>(i)]);
    const double g2 = dt * drifts.da2(w[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < i; ++j) {
      J(i, j) = g1;
      J(m + i, j) = g2;
    }
  }
  return J;
}

double density_p(const JointModel& model, const DriftPair& drifts, std::span<const double> xi) {
  if (!volterra_check(model).holds) throw std::domain_error("density_p: V fails the Volterra condition (zeta != 1)");
  const auto n = static_cast<Eigen::Index>(xi.size());
  const Eigen::Map<const Eigen::VectorXd> x(xi.data(), n);
  const Eigen::VectorXd u = drift_shift(model, drifts, xi);
  const Eigen::VectorXd y = model.S_inv * u;
  // tr(S dy/dxi) = tr(du/dxi)
  const double trace = drift_jacobian(model, drifts, xi).trace();
  return std::exp(y.dot(x) - trace - 0.5 * y.dot(u));
}

Eigen::VectorXd log_density_gradient(const JointModel& model, const DriftPair& drifts, std::span<const double> xi) {
  const auto n = static_cast<Eigen::Index>(xi.size());
  const Eigen::Map<const Eigen::VectorXd> x(xi.data(), n);
  const Eigen::VectorXd u = drift_shift(model, drifts, xi);
  const Eigen::MatrixXd J = drift_jacobian(model, drifts, xi);
  return model.S_inv * u + J.transpose() * (model.S_inv * (x - u));
}

Eigen::MatrixXd stoch_deriv_x1(const DriftPair& drifts, const core::TimeGrid& grid, std::span<const double> x1) {
  const auto m = static_cast<Eigen::Index>(grid.cells());
  if (static_cast<Eigen::Index>(x1.size()) != m + 1) throw std::invalid_argument("stoch_deriv_x1: path needs m+1 values");
  const double dt = grid.dt();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m + 1, m);
  for (Eigen::Index i = 1; i <= m; ++i) {
    const double growth = 1.0 + drifts.da1(x1[static_cast<std::size_t>(i - 1)]) * dt;
    for (Eigen::Index j = 0; j + 1 < i; ++j) D(i, j) = D(i - 1, j) * growth;
    D(i, i - 1) = 1.0;
  }
  return D;
}

std::vector<double> quasi_nilpotence(const JointModel& model, const DriftPair& drifts, std::span<const double> w1,
                                     int n_max) {
  const auto m = static_cast<Eigen::Index>(model.m());
  if (static_cast<Eigen::Index>(w1.size()) != m + 1) throw std::invalid_argument("quasi_nilpotence: path needs m+1 values");
  const double dt = model.grid.dt();
  Eigen::MatrixXd Dh = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      Dh(i, j) = dt * drifts.da1(w1[static_cast<std::size_t>(i)]);
      Dh(m + i, j) = dt * drifts.da2(w1[static_cast<std::size_t>(i)]);
    }
  }
  const Eigen::MatrixXd A = model.S * Dh;
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2 * m, 2 * m);
  std::vector<double> out;
  for (int n = 1; n <= n_max; ++n) {
    P = A * P;
    out.push_back(std::pow(core::operator_norm(P), 1.0 / n));
  }
  return out;
}

std::vector<double> nilpotence_envelope(const JointModel& model, const DriftPair& drifts, int n_max) {
  const double s = core::operator_norm(model.S);
  const double c = model.grid.horizon() * drifts.slope_bound * drifts.slope_bound;
  std::vector<double> out;
  for (int n = 1; n <= n_max; ++n) {
    out.push_back(s * std::sqrt(c) / std::pow(core::factorial(n), 0.5 / n));
  }
  return out;
}

double contraction_estimate(const JointModel& model, const DriftPair& drifts) {
  const double s = core::operator_norm(model.S);
  const double c = model.grid.horizon() * drifts.slope_bound * drifts.slope_bound;
  return s * s * c * model.grid.dt();
}

}  // namespace chaosflow::smoothing
