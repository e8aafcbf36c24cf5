#include "chaosflow/smoothing/bayes.h"

#include <cmath>
#include <stdexcept>

namespace chaosflow::smoothing {

std::vector<double> noise_from_path(const core::TimeGrid& grid, std::span<const double> path) {
  if (path.size() != grid.cells() + 1) throw std::invalid_argument("noise_from_path: path needs m+1 values");
  std::vector<double> xi(grid.cells());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = (path[i + 1] - path[i]) / grid.sqrt_dt();
  return xi;
}

namespace {

struct Particles {
  std::vector<double> loc;
  std::vector<double> p;
};

Particles draw(const JointModel& model, const DriftPair& drifts, std::span<const double> u, double t, std::size_t n,
               std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("pi_t: need at least one sample");
  if (!volterra_check(model).holds) throw std::domain_error("pi_t: V fails the Volterra condition (zeta != 1)");
  const auto xi2 = noise_from_path(model.grid, u);
  const auto law = conditional_law_w1(model, xi2);
  const std::size_t cells = model.grid.cells_until(t);
  const auto m = static_cast<Eigen::Index>(model.m());
  Particles out;
  out.loc.reserve(n);
  out.p.reserve(n);
  Eigen::VectorXd z(m), xi(2 * m);
  for (Eigen::Index j = 0; j < m; ++j) xi(m + j) = xi2[static_cast<std::size_t>(j)];
  for (std::size_t c = 0; c * core::kChunkSize < n; ++c) {
    core::Rng rng(core::chunk_seed(seed, c));
    const std::size_t count = std::min(core::kChunkSize, n - c * core::kChunkSize);
    for (std::size_t s = 0; s < count; ++s) {
      rng.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(m)));
      xi.head(m) = law.mean + law.factor * z;
      double w = 0.0;
      for (std::size_t j = 0; j < cells; ++j) w += model.grid.sqrt_dt() * xi(static_cast<Eigen::Index>(j));
      out.loc.push_back(w);
      const Eigen::VectorXd uu = drift_shift(model, drifts, std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
      const Eigen::VectorXd y = model.S_inv * uu;
      out.p.push_back(std::exp(y.dot(xi) - 0.5 * y.dot(uu)));
    }
  }
  return out;
}

}  // namespace

SmoothedMeasure pi_t(const JointModel& model, const DriftPair& drifts, std::span<const double> u, double t,
                     std::size_t n, std::uint64_t seed) {
  auto P = draw(model, drifts, u, t, n, seed);
  double sum = 0.0, sum2 = 0.0;
  for (double p : P.p) {
    sum += p;
    sum2 += p * p;
  }
  std::vector<double> w(P.p.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = P.p[i] / sum;
  SmoothedMeasure out{sq::ParticleMeasure(std::move(P.loc), std::move(w)), sum / static_cast<double>(n),
                      sum * sum / sum2};
  return out;
}

BayesEstimate bayes_psi(const JointModel& model, const DriftPair& drifts, const std::function<double(double)>& f,
                        double t, std::span<const double> u, std::size_t n, std::uint64_t seed, double ess_fraction) {
  const auto pm = pi_t(model, drifts, u, t, n, seed);
  const auto& loc = pm.measure.locations();
  const auto& w = pm.measure.weights();
  BayesEstimate r;
  r.value = pm.measure.pair(f);
  double var = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = f(loc[i]) - r.value;
    var += w[i] * w[i] * d * d;
  }
  r.std_error = std::sqrt(var);
  r.ess = pm.ess;
  r.ess_ok = pm.ess >= ess_fraction * static_cast<double>(n);
  return r;
}

}  // namespace chaosflow::smoothing
