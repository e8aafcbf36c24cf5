#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/chaos_random.h"
#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/sq/second_quant.h"
#include "doctest.h"

using namespace chaosflow;
using core::ChaosVector;

TEST_CASE("operator constructors") {
  CHECK(sq::identity_op(3).norm() == doctest::Approx(1.0));
  CHECK(sq::scalar_op(3, -0.4).norm() == doctest::Approx(0.4));
  CHECK(sq::ou_operator(0.5, 2).matrix()(0, 0) == doctest::Approx(std::exp(-0.5)));
  const double e[] = {0.6, 0.8};
  const auto P = sq::projector_op(e);
  CHECK((P.matrix() * P.matrix() - P.matrix()).norm() < 1e-14);
  CHECK(P.norm() == doctest::Approx(1.0));
  CHECK((P.complement_sqrt() * P.complement_sqrt() - (Eigen::MatrixXd::Identity(2, 2) - P.matrix())).norm() < 1e-12);
  CHECK_THROWS(sq::scalar_op(2, 1.5).require_contraction());
  const double bad[] = {1.0, 1.0};
  CHECK_THROWS(sq::projector_op(bad));
}

TEST_CASE("second quantization of special operators") {
  std::mt19937_64 rng(1);
  const auto c = core::random_chaos(3, 3, rng);

  // identity leaves the chaos unchanged
  const auto gi = sq::gamma_apply(sq::identity_op(3), c);
  for (int k = 0; k <= 3; ++k)
    for (std::size_t r = 0; r < c.coeff(k).size(); ++r) CHECK(gi.coeff(k)[r] == doctest::Approx(c.coeff(k)[r]));

  // zero operator keeps only the mean
  const auto g0 = sq::gamma_apply(sq::scalar_op(3, 0.0), c);
  CHECK(g0.mean() == doctest::Approx(c.mean()));
  CHECK(g0.max_degree(1e-15) == 0);

  // OU semigroup at time ln2/2 multiplies degree k by 2^{-k/2}
  const auto go = sq::gamma_apply(sq::ou_operator(0.5 * std::log(2.0), 3), c);
  for (int k = 0; k <= 3; ++k) {
    const double f = std::pow(2.0, -0.5 * k);
    for (std::size_t r = 0; r < c.coeff(k).size(); ++r)
      CHECK(go.coeff(k)[r] == doctest::Approx(f * c.coeff(k)[r]).epsilon(1e-12));
  }
  CHECK(go.coeff(2)[0] == doctest::Approx(0.5 * c.coeff(2)[0]).epsilon(1e-12));

  // projector on e1: Gamma(P) xi_1^2 - 1 unchanged, xi_2 removed
  const double e1[] = {1.0, 0.0, 0.0};
  ChaosVector h(3, 2);
  const int i00[] = {0, 0};
  const int i11[] = {1, 1};
  h.coeff(2).set(i00, 1.0);
  h.coeff(2).set(i11, 1.0);
  const auto gp = sq::gamma_apply(sq::projector_op(e1), h);
  CHECK(gp.coeff(2).at(i00) == doctest::Approx(1.0));
  CHECK(gp.coeff(2).at(i11) == doctest::Approx(0.0));
}

TEST_CASE("second quantization maps wick exponentials by the transpose") {
  Eigen::MatrixXd M(2, 2);
  M << 0.3, -0.5, 0.4, 0.2;
  const sq::BoundedOp C(M);
  const double phi[] = {0.7, -0.4};
  const auto lhs = sq::gamma_apply(C, core::wick_exp(phi, 14));
  const Eigen::Vector2d ct = M.transpose() * Eigen::Vector2d(phi[0], phi[1]);
  const auto rhs = core::wick_exp(std::span<const double>(ct.data(), 2), 14);
  for (int k = 0; k <= 14; ++k)
    for (std::size_t r = 0; r < lhs.coeff(k).size(); ++r)
      CHECK(lhs.coeff(k)[r] == doctest::Approx(rhs.coeff(k)[r]).epsilon(1e-12));
}

TEST_CASE("Monte Carlo representation of Gamma(C)") {
  std::mt19937_64 rng(2);
  const auto c = core::random_chaos(3, 3, rng);
  const core::ChaosEvaluator ev(c);
  const sq::NoiseFunctional F = [&](std::span<const double> x) { return ev(x); };
  const double xi[] = {0.4, -0.9, 1.3};

  // identity: every sample is F(xi), so the estimate is exact
  const auto id = sq::gamma_mc(sq::identity_op(3), F, xi, 2000, 7);
  CHECK(id.value == doctest::Approx(ev(xi)).epsilon(1e-12));
  CHECK(id.std_error < 1e-12);

  Eigen::MatrixXd M(3, 3);
  M << 0.5, 0.1, 0.0, -0.2, 0.4, 0.3, 0.1, 0.0, 0.6;
  const sq::BoundedOp C(M);
  const auto est = sq::gamma_mc(C, F, xi, 200000, 11);
  const double exact = core::chaos_eval(sq::gamma_apply(C, c), xi);
  CHECK(std::abs(est.value - exact) < 4.0 * est.std_error);

  // same seed, same answer
  const auto again = sq::gamma_mc(C, F, xi, 200000, 11);
  CHECK(again.value == est.value);

  CHECK_THROWS(sq::gamma_mc(sq::scalar_op(3, 1.2), F, xi, 10, 1));
}

TEST_CASE("random measure atoms") {
  const double xi[] = {0.5, -0.5};
  const sq::NoiseFunctional X = [](std::span<const double> x) { return x[0] + x[1]; };
  // C = 0: atoms are draws of a N(0, 2) variable
  const auto mu = sq::random_measure(sq::scalar_op(2, 0.0), X, xi, 50000, 3);
  CHECK(mu.size() == 50000);
  double wsum = 0.0;
  for (double w : mu.weights()) wsum += w;
  CHECK(wsum == doctest::Approx(1.0));
  const double var = mu.pair([](double y) { return y * y; });
  CHECK(var == doctest::Approx(2.0).epsilon(0.05));
  // C = I: a point mass at X(xi)
  const auto delta = sq::random_measure(sq::identity_op(2), X, xi, 100, 3);
  CHECK(delta.pair([](double y) { return y; }) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(sq::ParticleMeasure({1.0, 2.0}, {1.0}));
}
