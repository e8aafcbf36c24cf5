#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/chaos_random.h"
#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/core/time_grid.h"
#include "chaosflow/smoothing/bayes.h"
#include "chaosflow/smoothing/density.h"
#include "chaosflow/smoothing/joint_model.h"
#include "doctest.h"

using namespace chaosflow;
using smoothing::build_joint;

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("joint covariance structure") {
  const core::TimeGrid grid(1.0, 4);
  const auto m0 = build_joint(Eigen::MatrixXd::Zero(4, 4), grid);
  CHECK((m0.S - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-14);
  const double rho = 0.35;
  const auto m = build_joint(rho * Eigen::MatrixXd::Identity(4, 4), grid);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.S);
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(1 - rho));
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1 + rho));
  CHECK((m.S_half * m.S_half - m.S).norm() < 1e-12);
  CHECK((m.S_inv * m.S - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-12);
  CHECK((m.factor * m.factor.transpose() - m.S).norm() < 1e-12);
  CHECK_THROWS(build_joint(Eigen::MatrixXd::Identity(4, 4) * 1.0, grid));

  // law of xi1 given xi2: mean rho xi2, covariance (1 - rho^2) I
  const double xi2[] = {0.5, -1.0, 0.2, 1.5};
  const auto law = smoothing::conditional_law_w1(m, xi2);
  for (int i = 0; i < 4; ++i) CHECK(law.mean(i) == doctest::Approx(rho * xi2[i]));
  CHECK((law.factor * law.factor.transpose() - (1 - rho * rho) * Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  const auto mp = smoothing::conditional_mean_path(m, xi2);
  CHECK(mp[0] == 0.0);
  CHECK(mp[2] == doctest::Approx(rho * grid.sqrt_dt() * (0.5 - 1.0)));
  // V = 0: unconditional
  const auto law0 = smoothing::conditional_law_w1(m0, xi2);
  CHECK(law0.mean.norm() == 0.0);
}

TEST_CASE("Volterra condition") {
  const core::TimeGrid grid(1.0, 4);
  const auto diag = smoothing::volterra_check(build_joint(0.3 * Eigen::MatrixXd::Identity(4, 4), grid));
  CHECK(diag.holds);
  CHECK(diag.violation == 0.0);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(4, 4);
  L(1, 0) = 0.2;
  L(3, 1) = -0.3;
  CHECK(smoothing::volterra_check(build_joint(L, grid)).holds);
  const Eigen::MatrixXd U = L.transpose();
  const auto up = smoothing::volterra_check(build_joint(U, grid));
  CHECK_FALSE(up.holds);
  CHECK(up.violation > 0.0);
}

TEST_CASE("Cameron-Martin densities") {
  const core::TimeGrid grid(1.0, 3);
  const auto m0 = build_joint(Eigen::MatrixXd::Zero(3, 3), grid);
  const double xi[] = {0.3, -0.2, 0.8, 1.1, -0.5, 0.4};
  const double zero[6] = {};
  CHECK(smoothing::shift_density(m0, zero, xi) == doctest::Approx(1.0));
  const double h[] = {0.1, 0.2, -0.3, 0.0, 0.5, 0.1};
  double hx = 0.0, hh = 0.0;
  for (int i = 0; i < 6; ++i) {
    hx += h[i] * xi[i];
    hh += h[i] * h[i];
  }
  CHECK(smoothing::shift_density(m0, h, xi) == doctest::Approx(std::exp(hx - 0.5 * hh)));
  // general S: E exp{(S^{-1}h, xi) - (S^{-1}h, h)/2} = 1 checked by Monte Carlo
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 3);
  V(1, 0) = 0.4;
  V(2, 2) = 0.3;
  const auto m = build_joint(V, grid);
  const auto est = core::mc_estimate(100000, 9, [&](core::Rng& r) {
    const auto x = to_vec(smoothing::sample_noise(m, r));
    return smoothing::shift_density(m, h, x);
  });
  CHECK(std::abs(est.value - 1.0) < 4 * est.std_error);
}

TEST_CASE("density of the drifted pair") {
  const core::TimeGrid grid(1.0, 8);
  const auto m0 = build_joint(Eigen::MatrixXd::Zero(8, 8), grid);
  std::vector<double> xi(16);
  core::Rng rng(4);
  rng.fill_normal(xi);
  // zero drifts: p = 1
  CHECK(smoothing::density_p(m0, smoothing::DriftPair{}, xi) == doctest::Approx(1.0));

  // V = 0, a2 = 0: discrete Girsanov exponential exp{sum a1(w1) dw1 - (1/2) sum a1^2 dt}
  smoothing::DriftPair d;
  d.a1 = [](double x) { return std::sin(x); };
  d.da1 = [](double x) { return std::cos(x); };
  d.slope_bound = 1.0;
  double w = 0.0, lg = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const double dw = grid.sqrt_dt() * xi[i];
    lg += std::sin(w) * dw - 0.5 * std::sin(w) * std::sin(w) * grid.dt();
    w += dw;
  }
  CHECK(smoothing::density_p(m0, d, xi) == doctest::Approx(std::exp(lg)).epsilon(1e-12));

  // E p = 1 under a Volterra V
  Eigen::MatrixXd V = 0.3 * Eigen::MatrixXd::Identity(8, 8);
  V(4, 2) = 0.2;
  const auto m = build_joint(V, grid);
  smoothing::DriftPair d2 = d;
  d2.a2 = [](double x) { return 0.5 * x; };
  d2.da2 = [](double) { return 0.5; };
  d2.slope_bound = 1.5;
  const auto est = core::mc_estimate(50000, 21, [&](core::Rng& r) {
    const auto x = to_vec(smoothing::sample_noise(m, r));
    return smoothing::density_p(m, d2, x);
  });
  CHECK(std::abs(est.value - 1.0) < 4 * est.std_error);

  // non-Volterra correlation is refused
  Eigen::MatrixXd Vu = Eigen::MatrixXd::Zero(8, 8);
  for (Eigen::Index i = 0; i + 1 < 8; ++i) Vu(i, i + 1) = 0.4;
  const auto bad = build_joint(Vu, grid);
  CHECK_THROWS_AS(smoothing::density_p(bad, d, xi), std::domain_error);
}

TEST_CASE("stochastic derivative of the first component") {
  const core::TimeGrid grid(1.0, 50);
  const std::vector<double> x1(51, 0.2);
  const auto D0 = smoothing::stoch_deriv_x1(smoothing::DriftPair{}, grid, x1);
  CHECK(D0(10, 9) == 1.0);
  CHECK(D0(10, 3) == 1.0);
  CHECK(D0(10, 10) == 0.0);
  const double lam = -0.8;
  smoothing::DriftPair d;
  d.a1 = [lam](double x) { return lam * x; };
  d.da1 = [lam](double) { return lam; };
  const auto D = smoothing::stoch_deriv_x1(d, grid, x1);
  // Euler flow: (1 + lam dt)^{i-1-j}, close to e^{lam (t_i - t_j)}
  CHECK(D(40, 5) == doctest::Approx(std::pow(1 + lam * grid.dt(), 34)));
  CHECK(D(40, 5) == doctest::Approx(std::exp(lam * (grid.time(40) - grid.time(5)))).epsilon(0.02));
}

TEST_CASE("quasi-nilpotence") {
  const core::TimeGrid grid(1.0, 8);
  const auto m = build_joint(0.4 * Eigen::MatrixXd::Identity(8, 8), grid);
  const std::vector<double> w1(9, 0.1);
  for (double q : smoothing::quasi_nilpotence(m, smoothing::DriftPair{}, w1, 5)) CHECK(q == 0.0);
  smoothing::DriftPair d;
  d.a1 = [](double x) { return std::sin(x); };
  d.da1 = [](double x) { return std::cos(x); };
  d.slope_bound = 1.0;
  const auto q = smoothing::quasi_nilpotence(m, d, w1, 6);
  const auto env = smoothing::nilpotence_envelope(m, d, 6);
  REQUIRE(q.size() == env.size());
  for (std::size_t n = 0; n < q.size(); ++n) CHECK(q[n] <= env[n] * (1 + 1e-12));
  // the envelope decays like n^{-1/2}
  CHECK(env[5] < env[0]);
}

TEST_CASE("Bayes pairing") {
  const core::TimeGrid grid(1.0, 8);
  const double rho = 0.5;
  const auto m = build_joint(rho * Eigen::MatrixXd::Identity(8, 8), grid);
  std::vector<double> u(9, 0.0);
  for (std::size_t i = 1; i < 9; ++i) u[i] = u[i - 1] + 0.1 * std::sin(static_cast<double>(i));
  smoothing::DriftPair d;
  d.a1 = [](double x) { return 0.5 * std::sin(x); };
  d.da1 = [](double x) { return 0.5 * std::cos(x); };
  d.a2 = [](double x) { return 0.3 * x; };
  d.da2 = [](double) { return 0.3; };
  d.slope_bound = 0.8;
  const auto one = smoothing::bayes_psi(m, d, [](double) { return 1.0; }, 1.0, u, 2000, 3);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-14));

  // zero drifts: the Gaussian conditional mean rho u(t)
  const auto xi2 = smoothing::noise_from_path(grid, u);
  CHECK(xi2[1] == doctest::Approx((u[2] - u[1]) / grid.sqrt_dt()));
  const auto mean = smoothing::bayes_psi(m, smoothing::DriftPair{}, [](double x) { return x; }, 1.0, u, 40000, 5);
  CHECK(std::abs(mean.value - rho * u[8]) < 4 * mean.std_error);
  const auto pi = smoothing::pi_t(m, smoothing::DriftPair{}, u, 1.0, 1000, 6);
  CHECK(pi.normalization == doctest::Approx(1.0));
  CHECK(pi.ess == doctest::Approx(1000.0));
}

TEST_CASE("Skorokhod calculus under correlated noise") {
  const core::TimeGrid grid(1.0, 1);
  Eigen::MatrixXd V(1, 1);
  V(0, 0) = 0.4;
  const auto m = build_joint(V, grid);
  const std::size_t d = 2;
  // deterministic x: J(phi) = (phi, xi)
  const double phi[] = {0.7, -0.3};
  const auto J = smoothing::j_integral(m, core::HChaosVector::deterministic(phi, d, 2));
  const double xi[] = {0.9, -0.4};
  const Eigen::Vector2d xp = m.S_half.inverse() * Eigen::Vector2d(xi[0], xi[1]);
  CHECK(core::chaos_eval(J, std::span<const double>(xp.data(), 2)) == doctest::Approx(0.7 * 0.9 + 0.3 * 0.4));

  // V = 0 reduces to the ordinary Skorokhod integral
  const auto m0 = build_joint(Eigen::MatrixXd::Zero(1, 1), grid);
  std::mt19937_64 rng(3);
  core::HChaosVector x(d, d, 3);
  for (std::size_t s = 0; s < d; ++s) x[s] = core::random_chaos(d, 2, rng).with_order(3);
  const auto j0 = smoothing::j_integral(m0, x);
  const auto sk = core::skorokhod(x);
  for (int k = 0; k <= 3; ++k)
    for (std::size_t r = 0; r < sk.coeff(k).size(); ++r) CHECK(j0.coeff(k)[r] == doctest::Approx(sk.coeff(k)[r]));

  // product and derivative identities
  const double h[] = {0.5, 1.2};
  const auto alpha = core::random_chaos(d, 1, rng).with_order(3);
  core::HChaosVector y(d, d, 3);
  for (std::size_t s = 0; s < d; ++s) y[s] = core::random_chaos(d, 1, rng).with_order(3);
  const auto res = smoothing::skorokhod_identities(alpha, y, h, m);
  CHECK(res.first < 1e-10);
  CHECK(res.second < 1e-10);
  const auto triv = smoothing::skorokhod_identities(core::ChaosVector::constant(d, 3, 2.0),
                                                    core::HChaosVector::deterministic(phi, d, 3), h, m);
  CHECK(triv.first < 1e-12);
  CHECK(triv.second < 1e-12);
}
