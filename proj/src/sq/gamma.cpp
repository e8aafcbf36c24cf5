#include <limits>
#include <stdexcept>

#include "chaosflow/sq/second_quant.h"

namespace chaosflow::sq {

core::ChaosVector gamma_apply(const BoundedOp& C, const core::ChaosVector& c) {
  C.require_contraction();
  if (C.dim() != c.dim()) throw std::invalid_argument("gamma_apply: dimension mismatch");
  return core::contract_noise(c, C.matrix());
}

core::HChaosVector gamma_apply(const BoundedOp& C, const core::HChaosVector& x) {
  core::HChaosVector out(x.free_dim(), x.dim(), x.order());
  for (std::size_t s = 0; s < x.free_dim(); ++s) out[s] = gamma_apply(C, x[s]);
  return out;
}

namespace {

struct EtaSampler {
  Eigen::MatrixXd R;
  Eigen::VectorXd mean;
  bool deterministic;

  EtaSampler(const BoundedOp& C, std::span<const double> xi) {
    if (xi.size() != C.dim()) throw std::invalid_argument("gamma_mc: noise dimension mismatch");
    R = C.complement_sqrt();
    Eigen::Map<const Eigen::VectorXd> x(xi.data(), static_cast<Eigen::Index>(xi.size()));
    mean = C.matrix() * x;
    deterministic = R.isZero(0.0);
  }

  void draw(core::Rng& rng, Eigen::VectorXd& z, Eigen::VectorXd& eta) const {
    if (deterministic) {
      eta = mean;
      return;
    }
    rng.fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(z.size())));
    eta.noalias() = R * z;
    eta += mean;
  }
};

}  // namespace

std::vector<core::Estimate> gamma_mc(const BoundedOp& C, std::size_t outputs, const MultiNoiseFunctional& F,
                                     std::span<const double> xi, std::size_t n, std::uint64_t seed) {
  const EtaSampler s(C, xi);
  const auto m = static_cast<Eigen::Index>(C.dim());
  return core::mc_estimate(n, seed, outputs, [&](core::Rng& rng, std::span<double> out) {
    thread_local Eigen::VectorXd z;
    thread_local Eigen::VectorXd eta;
    z.resize(m);
    eta.resize(m);
    s.draw(rng, z, eta);
    F(std::span<const double>(eta.data(), static_cast<std::size_t>(m)), out);
  });
}

core::Estimate gamma_mc(const BoundedOp& C, const NoiseFunctional& F, std::span<const double> xi, std::size_t n,
                        std::uint64_t seed) {
  return gamma_mc(
      C, 1, [&](std::span<const double> eta, std::span<double> out) { out[0] = F(eta); }, xi, n, seed)[0];
}

ParticleMeasure::ParticleMeasure(std::vector<double> locations, std::vector<double> weights)
    : loc_(std::move(locations)), w_(std::move(weights)) {
  if (loc_.size() != w_.size() || loc_.empty()) throw std::invalid_argument("ParticleMeasure: need matching nonempty atoms");
  double tot = 0.0;
  for (double w : w_) {
    if (w < 0.0) throw std::invalid_argument("ParticleMeasure: negative weight");
    tot += w;
  }
  // summation rounding grows with the number of atoms
  const double tol = 1e-12 + 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(w_.size());
  if (std::abs(tot - 1.0) > tol) throw std::invalid_argument("ParticleMeasure: weights must sum to 1");
}

double ParticleMeasure::pair(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < loc_.size(); ++i) s += w_[i] * f(loc_[i]);
  return s;
}

ParticleMeasure random_measure(const BoundedOp& C, const NoiseFunctional& X, std::span<const double> xi,
                               std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("random_measure: need at least one atom");
  const EtaSampler s(C, xi);
  const auto m = static_cast<Eigen::Index>(C.dim());
  std::vector<double> loc(n);
  Eigen::VectorXd z(m);
  Eigen::VectorXd eta(m);
  // Same chunked streams as gamma_mc, so pairings reproduce its estimates.
  for (std::size_t c = 0; c * core::kChunkSize < n; ++c) {
    core::Rng rng(core::chunk_seed(seed, c));
    const std::size_t end = std::min(n, (c + 1) * core::kChunkSize);
    for (std::size_t i = c * core::kChunkSize; i < end; ++i) {
      s.draw(rng, z, eta);
      loc[i] = X(std::span<const double>(eta.data(), static_cast<std::size_t>(m)));
    }
  }
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  // make the weights sum to one exactly in floating point
  double tot = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) tot += w[i];
  w[n - 1] = 1.0 - tot;
  return ParticleMeasure(std::move(loc), std::move(w));
}

}  // namespace chaosflow::sq
