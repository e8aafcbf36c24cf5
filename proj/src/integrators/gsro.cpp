#include "chaosflow/integrators/gsro.h"

#include <algorithm>
#include <stdexcept>

namespace chaosflow::integrators {

void Gsro::validate() const {
  if (alpha1.empty()) throw std::invalid_argument("Gsro: alpha1 must have at least one entry");
  if (static_cast<std::size_t>(alpha0.cols()) != in_dim()) throw std::invalid_argument("Gsro: alpha0 columns must equal input dimension");
  for (const auto& a : alpha1) {
    if (a.rows() != alpha0.rows() || static_cast<std::size_t>(a.cols()) != noise_dim()) {
      throw std::invalid_argument("Gsro: inconsistent alpha1 shapes");
    }
  }
}

Gsro ito_gsro(const core::TimeGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.cells());
  Gsro A;
  A.alpha0 = Eigen::MatrixXd::Zero(m, m);
  A.alpha1.assign(grid.cells(), Eigen::MatrixXd::Zero(m, m));
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index i = a; i < m; ++i) A.alpha1[static_cast<std::size_t>(a)](i, a) = grid.sqrt_dt();
  }
  return A;
}

Gsro ito_scalar_gsro(const core::TimeGrid& grid, double t) {
  const std::size_t it = grid.cells_until(t);
  const auto m = static_cast<Eigen::Index>(grid.cells());
  Gsro A;
  A.alpha0 = Eigen::MatrixXd::Zero(1, m);
  A.alpha1.assign(grid.cells(), Eigen::MatrixXd::Zero(1, m));
  for (std::size_t a = 0; a < it; ++a) A.alpha1[a](0, static_cast<Eigen::Index>(a)) = 1.0;
  return A;
}

core::HChaosVector gsro_deterministic(const Gsro& A, std::span<const double> phi, int order) {
  A.validate();
  if (phi.size() != A.in_dim()) throw std::invalid_argument("gsro_deterministic: dimension mismatch");
  if (order < 1) throw std::invalid_argument("gsro_deterministic: order must be at least 1");
  Eigen::Map<const Eigen::VectorXd> p(phi.data(), static_cast<Eigen::Index>(phi.size()));
  const Eigen::VectorXd d = A.alpha0 * p;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(A.alpha0.rows(), static_cast<Eigen::Index>(A.noise_dim()));
  for (std::size_t a = 0; a < A.in_dim(); ++a) {
    if (phi[a] != 0.0) k += phi[a] * A.alpha1[a];
  }
  core::HChaosVector out(A.out_dim(), A.noise_dim(), order);
  for (std::size_t i = 0; i < A.out_dim(); ++i) {
    out[i].coeff(0)[0] = d(static_cast<Eigen::Index>(i));
    auto v = out[i].coeff(1).values();
    for (std::size_t j = 0; j < A.noise_dim(); ++j) v[j] = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

core::HChaosVector gsro_random(const Gsro& A, const core::HChaosVector& x) {
  A.validate();
  if (x.free_dim() != A.in_dim() || x.dim() != A.noise_dim()) throw std::invalid_argument("gsro_random: dimension mismatch");
  core::HChaosVector out = core::apply_free(A.alpha0, x);
  const auto n = static_cast<Eigen::Index>(A.noise_dim());
  for (std::size_t i = 0; i < A.out_dim(); ++i) {
    // y^(i)_j = sum_a alpha1[a](i, j) x_a, then its divergence
    Eigen::MatrixXd M(n, static_cast<Eigen::Index>(A.in_dim()));
    for (std::size_t a = 0; a < A.in_dim(); ++a) M.col(static_cast<Eigen::Index>(a)) = A.alpha1[a].row(static_cast<Eigen::Index>(i)).transpose();
    out[i] += core::skorokhod(core::apply_free(M, x));
  }
  return out;
}

Gsro gamma_gsro(const sq::BoundedOp& C, const Gsro& A) {
  A.validate();
  if (C.dim() != A.noise_dim()) throw std::invalid_argument("gamma_gsro: dimension mismatch");
  Gsro B;
  B.alpha0 = A.alpha0;
  B.alpha1.reserve(A.in_dim());
  for (const auto& a : A.alpha1) B.alpha1.push_back(a * C.matrix());
  return B;
}

double intertwine_check(const Gsro& A, const sq::BoundedOp& C, const core::HChaosVector& x) {
  const auto lhs = sq::gamma_apply(C, gsro_random(A, x));
  const auto rhs = gsro_random(gamma_gsro(C, A), sq::gamma_apply(C, x));
  return core::moment2(lhs - rhs);
}

IntegratorProcess::IntegratorProcess(sq::BoundedOp C, core::TimeGrid grid) : C_(std::move(C)), grid_(grid) {
  if (C_.dim() != grid_.cells()) throw std::invalid_argument("IntegratorProcess: operator dimension must equal grid cells");
}

Eigen::VectorXd IntegratorProcess::path_kernel(std::size_t i) const {
  const auto m = static_cast<Eigen::Index>(grid_.cells());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  w.head(static_cast<Eigen::Index>(i)).setConstant(grid_.sqrt_dt());
  return C_.matrix().transpose() * w;
}

double IntegratorProcess::ratio(std::span<const double> a) const {
  Eigen::Map<const Eigen::VectorXd> v(a.data(), static_cast<Eigen::Index>(a.size()));
  const double den = v.squaredNorm();
  if (den == 0.0) throw std::invalid_argument("IntegratorProcess::ratio: zero step function");
  return (C_.matrix().transpose() * v).squaredNorm() / den;
}

IntegratorBound integrator_bound(const IntegratorProcess& g, std::size_t trials, std::uint64_t seed) {
  core::Rng rng(seed);
  const std::size_t m = g.grid().cells();
  std::vector<double> a(m);
  IntegratorBound b;
  b.sup_ratio = g.op().norm() * g.op().norm();
  for (std::size_t t = 0; t < trials; ++t) {
    // random step function: normal heights on a random sub-interval
    const std::size_t lo = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m));
    const std::size_t hi = lo + 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(m - lo));
    for (std::size_t k = 0; k < m; ++k) a[k] = (k >= lo && k < hi) ? rng.normal() : 0.0;
    if (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) a[lo] = 1.0;
    b.max_ratio = std::max(b.max_ratio, g.ratio(a));
  }
  return b;
}

core::ChaosVector extended_integral_gamma(const sq::BoundedOp& C, const core::HChaosVector& x,
                                          const core::TimeGrid& grid, double t) {
  const Gsro A = gamma_gsro(C, ito_scalar_gsro(grid, t));
  return gsro_random(A, x)[0];
}

core::ChaosVector projector_integral_closed_form(std::span<const double> e, const core::HChaosVector& zeta,
                                                 const core::TimeGrid& grid, double t) {
  const std::size_t it = grid.cells_until(t);
  const std::size_t m = zeta.dim();
  const int N = zeta.order();
  core::ChaosVector acc(m, N);
  core::ChaosVector corr(m, N);
  for (std::size_t a = 0; a < it; ++a) {
    if (e[a] == 0.0) continue;
    acc += e[a] * zeta[a];
    corr += e[a] * core::derivative_along(zeta[a], e);
  }
  const auto eta = core::ChaosVector::linear(e, 1);
  return core::multiply(eta, acc, N) - corr;
}

}  // namespace chaosflow::integrators
