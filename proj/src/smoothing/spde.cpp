#include "chaosflow/smoothing/spde.h"

#include <cmath>
#include <stdexcept>

#include "chaosflow/core/monte_carlo.h"

namespace chaosflow::smoothing {

std::vector<FilteringRow> filtering_residual(const JointModel& model, const DriftPair& drifts, const TestFunction& f,
                                         std::span<const double> rs, double t, std::span<const double> xi2,
                                         std::size_t n, std::uint64_t seed) {
  if (!volterra_check(model).holds) throw std::domain_error("filtering_residual: V fails the Volterra condition");
  const auto m = static_cast<Eigen::Index>(model.m());
  const std::size_t cells = model.grid.cells_until(t);
  const double dt = model.grid.dt();
  const double sd = model.grid.sqrt_dt();
  const auto law = conditional_law_w1(model, xi2);
  const Eigen::MatrixXd W = model.V * model.V.transpose();
  // c_l = sum_{a<l} (V V^T)_{la}: d w1(t_l)/d xi2 contracted with row l of V
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  for (Eigen::Index l = 0; l < m; ++l) c(l) = sd * W.row(l).head(l).sum();
  const std::size_t R = rs.size();
  auto sample = [&](core::Rng& rng, std::span<double> out) {
    Eigen::VectorXd z(m), xi(2 * m);
    rng.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(m)));
    xi.head(m) = law.mean + law.factor * z;
    for (Eigen::Index j = 0; j < m; ++j) xi(m + j) = xi2[static_cast<std::size_t>(j)];
    const std::span<const double> xs(xi.data(), static_cast<std::size_t>(xi.size()));
    const Eigen::VectorXd u = drift_shift(model, drifts, xs);
    const Eigen::VectorXd y = model.S_inv * u;
    const double p = std::exp(y.dot(xi) - 0.5 * y.dot(u));
    const Eigen::VectorXd grad = log_density_gradient(model, drifts, xs);
    // (S D p)_1 and the xi2-derivative of log p through xi1 = V xi2 + L z
    const Eigen::VectorXd sdp1 = p * (grad.head(m) + model.V * grad.tail(m));
    const Eigen::VectorXd g = model.V.transpose() * grad.head(m) + grad.tail(m);
    const Eigen::VectorXd Vg = model.V * g;
    std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) w[i + 1] = w[i] + sd * xi(static_cast<Eigen::Index>(i));
    for (std::size_t q = 0; q < R; ++q) {
      const double r = rs[q];
      double U2 = 0.0, gam = 0.0, sdp = 0.0, ito = 0.0, drift_term = 0.0;
      for (std::size_t l = 0; l < cells; ++l) {
        const auto L = static_cast<Eigen::Index>(l);
        const double f0 = f.f(r + w[l]), f1 = f.df(r + w[l]), f2 = f.d2f(r + w[l]);
        U2 += 0.5 * dt * f2 * p;
        gam += sd * (f1 * p * law.mean(L) - (f2 * p * c(L) + f1 * p * Vg(L)));
        sdp += sd * f1 * sdp1(L);
        ito += p * (f.f(r + w[l + 1]) - f0 - f1 * sd * xi(L));
        drift_term += dt * f1 * p;
      }
      const double A = (f.f(r + w[cells]) - f.f(r)) * p;
      const double res = A - U2 - gam - sdp;
      const double disc = ito - U2;
      out[3 * q] = res;
      out[3 * q + 1] = res - disc;
      out[3 * q + 2] = A - U2 - gam - drifts.a1(r) * drift_term;
    }
  };
  const auto est = core::mc_estimate(n, seed, 3 * R, sample);
  std::vector<FilteringRow> rows(R);
  for (std::size_t q = 0; q < R; ++q) {
    auto& row = rows[q];
    row.r = rs[q];
    row.residual = est[3 * q].value;
    row.residual_se = est[3 * q].std_error;
    row.corrected = est[3 * q + 1].value;
    row.corrected_se = est[3 * q + 1].std_error;
    row.discretization = row.residual - row.corrected;
    row.reduced = est[3 * q + 2].value;
    row.reduced_se = est[3 * q + 2].std_error;
    row.error_bar = 3.0 * row.residual_se + std::abs(row.discretization);
  }
  return rows;
}

}  // namespace chaosflow::smoothing
