#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/chaos_random.h"
#include "chaosflow/core/hermite.h"
#include "chaosflow/core/quadrature.h"
#include "chaosflow/core/time_grid.h"
#include "chaosflow/pde/bvp1d.h"
#include "chaosflow/pde/bvp3.h"
#include "chaosflow/pde/hitting.h"
#include "chaosflow/pde/killed.h"
#include "chaosflow/pde/linear_sde.h"
#include "chaosflow/pde/weak.h"
#include "chaosflow/sq/second_quant.h"
#include "doctest.h"

using namespace chaosflow;
using core::ChaosVector;

namespace {

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double brownian_w(const core::TimeGrid& g, double t, std::span<const double> xi) {
  double w = 0.0;
  for (std::size_t j = 0; j < g.cells_until(t); ++j) w += g.sqrt_dt() * xi[j];
  return w;
}

}  // namespace

TEST_CASE("killed heat kernel") {
  CHECK(pde::killed_kernel(0.7, 0.0, 1.3) == doctest::Approx(0.0));
  CHECK(pde::killed_kernel(0.7, 0.4, 1.3) == doctest::Approx(pde::killed_kernel(0.7, 1.3, 0.4)));
  CHECK(pde::killed_survival(1.0, 1.0) == doctest::Approx(2.0 * phi_cdf(1.0) - 1.0));
  const double mass = core::integrate_gl([](double y) { return pde::killed_kernel(0.5, 0.8, y); }, 0.0, 12.0, 60, 20);
  CHECK(mass == doctest::Approx(pde::killed_survival(0.5, 0.8)).epsilon(1e-12));
  CHECK(pde::normal_cdf(0.3) == doctest::Approx(phi_cdf(0.3)));
  CHECK(pde::first_passage_probability(1.0, 1.0) == doctest::Approx(2.0 * (1.0 - phi_cdf(1.0))));
}

TEST_CASE("complex linear equation") {
  const core::TimeGrid grid(1.0, 6);
  const double xi[] = {0.3, -0.8, 1.1, 0.2, -0.5, 0.9};
  const double a = 0.4, b = 1.3, t = 0.5;
  const double w = brownian_w(grid, t, xi);
  // alpha = 1: the classical stochastic exponential
  const auto one = ChaosVector::constant(6, 2, 1.0);
  const auto z1 = pde::complex_linear_sde(a, b, one, grid, t, xi);
  const auto expect = std::exp(a * t + 0.5 * b * b * t) * std::exp(std::complex<double>(0.0, b * w));
  CHECK(z1.real() == doctest::Approx(expect.real()));
  CHECK(z1.imag() == doctest::Approx(expect.imag()));
  // b = 0: alpha e^{at}
  std::mt19937_64 rng(2);
  const auto alpha = core::random_chaos(6, 3, rng);
  const auto z0 = pde::complex_linear_sde(a, 0.0, alpha, grid, t, xi);
  CHECK(z0.real() == doctest::Approx(core::chaos_eval(alpha, xi) * std::exp(a * t)));
  CHECK(z0.imag() == doctest::Approx(0.0));
  // independent matrix-series implementation
  for (double tt : {0.5, 1.0}) {
    const auto z = pde::complex_linear_sde(a, b, alpha, grid, tt, xi);
    const auto s = pde::matrix_series_solution(a, b, alpha, grid, tt, xi);
    CHECK(s[0] == doctest::Approx(z.real()).epsilon(1e-10));
    CHECK(s[1] == doctest::Approx(z.imag()).epsilon(1e-10));
  }
}

TEST_CASE("series solution of the stochastic heat equation") {
  const core::TimeGrid grid(1.0, 8);
  const double xi[] = {0.3, -0.8, 1.1, 0.2, -0.5, 0.9, -1.4, 0.6};
  const pde::SmoothFn phi = [](int k, double x) { return core::factorial(0) * std::cos(x + k * M_PI / 2); };
  const double x = 0.35, t = 0.5;
  const double w = brownian_w(grid, t, xi);
  const auto one = ChaosVector::constant(8, 2, 1.0);
  CHECK(pde::series_solution_cauchy(phi, one, grid, x, t, xi) == doctest::Approx(std::cos(x + w)));
  // alpha = w(T): phi(x + w(t)) w(T) - t phi'(x + w(t))
  const auto e = pde::indicator_coords(grid, 1.0);
  const auto wT = ChaosVector::linear(e, 2);
  const double wTv = brownian_w(grid, 1.0, xi);
  CHECK(pde::series_solution_cauchy(phi, wT, grid, x, t, xi) ==
        doctest::Approx(std::cos(x + w) * wTv + t * std::sin(x + w)));
  // Wick pairing with psi = 0 is the heat semigroup times E alpha
  const std::vector<double> psi(8, 0.0);
  CHECK(pde::cauchy_wick_pairing(phi, one, grid, psi, x, t) == doctest::Approx(std::cos(x) * std::exp(-t / 2)));
}

TEST_CASE("simplex weights") {
  const core::TimeGrid grid(1.0, 4);
  const auto w1 = pde::simplex_weights(grid, 0.5, 1);
  CHECK(w1[0] == doctest::Approx(grid.sqrt_dt()));
  CHECK(w1[3] == doctest::Approx(0.0));
  // summed over sorted indices against 1_{[0,t]}: the simplex volume t^k / k!
  const auto ind = pde::indicator_coords(grid, 0.5);
  for (int k = 0; k <= 3; ++k) {
    const auto wk = pde::simplex_weights(grid, 0.5, k);
    double s = 0.0;
    core::SymmetricTensor::for_each_index(4, k, [&](std::size_t r, std::span<const int> idx) {
      double p = wk[r];
      for (int i : idx) p *= ind[static_cast<std::size_t>(i)];
      s += p;
    });
    CHECK(s == doctest::Approx(std::pow(0.5, k) / core::factorial(k)));
  }
}

TEST_CASE("three-variable boundary problem") {
  pde::SpaceTimeGrid g;
  g.x_max = 6.0;
  g.h = 0.02;
  g.t = 1.0;
  g.steps = 50;
  pde::Bvp3Options opt;
  opt.depth = 12;
  opt.boundary = 0.0;
  const double c = 0.7;
  const auto field = pde::bvp3_solve([c](double) { return c; }, g, opt);
  // constant data with zero boundary value: V_0 = c P(no hit)
  for (double x : {0.5, 1.0, 2.0}) {
    CHECK(field.coeff_at(0, x, 0) == doctest::Approx(c * pde::killed_survival(1.0, x)).epsilon(1e-3));
    CHECK(pde::bvp3_closed_form([c](double) { return c; }, 0.0, 1.0, 2.0, 0, x) ==
          doctest::Approx(c * pde::killed_survival(1.0, x)).epsilon(1e-10));
  }
  // terminal condition holds exactly at the nodes
  const auto f = [](double y) { return y * y * y; };
  pde::Bvp3Options o2;
  o2.depth = 6;
  const auto fld = pde::bvp3_solve(f, g, o2);
  for (std::size_t i = 0; i < g.points(); i += 25) {
    CHECK(fld.coeff(0)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g.steps)) == f(g.x(i)));
    CHECK(fld.coeff(3)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g.steps)) == 0.0);
  }
  // semigroup solver agrees with the closed form and with finite differences
  const auto fd = pde::bvp3_solve_fd(f, g, o2);
  for (int k = 0; k <= 3; ++k) {
    const double cf = pde::bvp3_closed_form(f, 0.0, 1.0, fld.horizon(), k, 1.0);
    CHECK(fld.coeff_at(k, 1.0, 0) == doctest::Approx(cf).epsilon(1e-3));
    CHECK(fd.coeff_at(k, 1.0, 0) == doctest::Approx(cf).epsilon(1e-3));
  }
  CHECK(pde::curvature_at_zero([](double y) { return y * y; }) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS(pde::bvp3_solve([](double y) { return y * y; }, g, o2));
}

TEST_CASE("hitting probabilities") {
  const double xi_up[] = {1.0, 1.0, 1.0, 1.0};
  CHECK(pde::hit_probability_given_path(1.0, 0.25, xi_up, 0) == 0.0);
  const double xi_down[] = {-5.0, 0.0, 0.0, 0.0};
  CHECK(pde::hit_probability_given_path(1.0, 0.25, xi_down, 1) == doctest::Approx(1.0));
  // one cell, path from x to y > 0: Brownian bridge crossing exp(-2xy/dt)
  const double xi1[] = {0.2};
  const double y = 0.5 + 0.5 * 0.2;
  CHECK(pde::hit_probability_given_path(0.5, 0.25, xi1, 1) == doctest::Approx(std::exp(-2 * 0.5 * y / 0.25)));

  // C = 0: unconditional first-passage probability; the bridge correction makes the grid exact
  const core::TimeGrid grid(2.0, 32);
  const std::vector<double> xi(32, 0.3);
  const auto est = pde::hitting_mc(1.0, 1.0, sq::scalar_op(32, 0.0), grid, xi, 40000, 5);
  CHECK(std::abs(est.value - pde::first_passage_probability(1.0, 1.0)) < 3.5 * est.std_error);
  // C = I: the conditional value of the given path
  const auto id = pde::hitting_mc(1.0, 1.0, sq::identity_op(32), grid, xi, 10, 5);
  CHECK(id.value == doctest::Approx(pde::hit_probability_given_path(1.0, grid.dt(), xi, 16)));
  CHECK(pde::mollified_indicator(0.0, 0.1) == 0.0);
  CHECK(pde::mollified_indicator(2.0, 0.1) == doctest::Approx(1.0));
}

TEST_CASE("reflected diffusion") {
  // reflected Brownian motion: E cos|x + W_t| = cos(x) e^{-t/2}
  const pde::CoefFn f = [](double x) { return std::cos(x); };
  const pde::Diffusion1d bm;
  const double fd = pde::reflected_fd_oracle(f, bm, 0.3, 1.0, 4.0 * M_PI, 2001, 2000);
  CHECK(fd == doctest::Approx(std::cos(0.3) * std::exp(-0.5)).epsilon(1e-5));
  const double xi[] = {-2.0, 0.5};
  CHECK(pde::reflected_path(0.3, bm, 0.25, xi, 2) == doctest::Approx(std::abs(std::abs(0.3 - 1.0) + 0.25)));
  // C = I is pathwise
  const core::TimeGrid grid(1.0, 2);
  const auto est = pde::reflected_bvp_1d(sq::identity_op(2), f, bm, 0.3, 1.0, grid, xi, 50, 1);
  CHECK(est.value == doctest::Approx(std::cos(pde::reflected_path(0.3, bm, 0.5, xi, 2))));
}

TEST_CASE("stopped diffusion") {
  pde::StoppedProblem p;
  // harmonic data for Brownian motion: g~(x) = x / L
  const pde::HarmonicExtension g(p);
  CHECK(g(0.3) == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(pde::stopped_fd_oracle(p, 0.3, 0.0, 1.0, 401, 400) == doctest::Approx(0.3).epsilon(1e-8));
  // with constant drift b the scale function gives (1 - e^{-2bx}) / (1 - e^{-2bL})
  pde::StoppedProblem q;
  q.coef.drift = [](double) { return 0.3; };
  const pde::HarmonicExtension gq(q);
  CHECK(gq(0.4) == doctest::Approx((1 - std::exp(-0.24)) / (1 - std::exp(-0.6))).epsilon(1e-6));
  // Brownian motion started at x: E g~(y(T ^ tau)) = g~(x) by optional stopping
  const core::TimeGrid grid(1.0, 32);
  const std::vector<double> xi(32, 0.1);
  const auto est = pde::stopped_bvp_1d(sq::scalar_op(32, 0.0), p, 0.4, 0.0, grid, xi, 20000, 3);
  CHECK(std::abs(est.value - 0.4) < 3.5 * est.std_error + 1e-12);
}

TEST_CASE("weak residual of an exact Gaussian field") {
  // psi = 0: U(x,t) = E cos(x + w(t)) = cos(x) e^{-t/2} solves U_t = U''/2
  const core::TimeGrid grid(1.0, 32);
  const std::vector<double> psi(32, 0.0);
  const pde::PairedField U = [&](double x, std::size_t i) { return std::cos(x) * std::exp(-0.5 * grid.time(i)); };
  const double xs[] = {-0.5, 0.0, 0.7};
  const double r = pde::wick_pde_residual(U, grid, psi, pde::WeakProblem{}, xs, 0.01);
  CHECK(r < 1e-4);
  const pde::PairedField V = [&](double x, std::size_t i) { return std::cos(x) * std::exp(-0.4 * grid.time(i)); };
  CHECK(pde::wick_pde_residual(V, grid, psi, pde::WeakProblem{}, xs, 0.01) > 1e-2);
}
