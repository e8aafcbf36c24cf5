#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/chaos_random.h"
#include "chaosflow/core/hermite.h"
#include "chaosflow/core/linalg.h"
#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/core/quadrature.h"
#include "chaosflow/core/symmetric_tensor.h"
#include "chaosflow/core/time_grid.h"
#include "doctest.h"

using namespace chaosflow::core;

namespace {

// Independent 1-D Gauss-Hermite rule (probabilists' weight, unit mass): Newton
// on He_n from asymptotic starting points, w_i = n! / (n He_{n-1}(x_i))^2.
struct Rule {
  std::vector<double> x, w;
};

Rule newton_gh(int n) {
  auto he = [](int k, double x, double& dk) {
    double p0 = 1.0, p1 = x;
    if (k == 0) {
      dk = 0.0;
      return 1.0;
    }
    for (int j = 1; j < k; ++j) {
      const double p2 = x * p1 - j * p0;
      p0 = p1;
      p1 = p2;
    }
    dk = k * p0;  // He_k' = k He_{k-1}
    return p1;
  };
  Rule r;
  std::vector<double> roots;
  // bracket roots on a fine scan, then polish
  const double lim = 2.0 * std::sqrt(static_cast<double>(n)) + 2.0;
  double prev_x = -lim, d;
  double prev_v = he(n, prev_x, d);
  for (int s = 1; s <= 200000; ++s) {
    const double x = -lim + 2.0 * lim * s / 200000.0;
    const double v = he(n, x, d);
    if ((prev_v < 0) != (v < 0)) {
      double z = 0.5 * (x + prev_x);
      for (int it = 0; it < 50; ++it) {
        double dz;
        const double f = he(n, z, dz);
        z -= f / dz;
      }
      roots.push_back(z);
    }
    prev_x = x;
    prev_v = v;
  }
  double fact = 1.0;
  for (int j = 2; j <= n; ++j) fact *= j;
  for (double z : roots) {
    double dd;
    const double hm1 = he(n - 1, z, dd);
    r.x.push_back(z);
    r.w.push_back(fact / (static_cast<double>(n) * n * hm1 * hm1));
  }
  return r;
}

template <class F>
double brute_expect(F f, std::size_t m, int order) {
  const Rule r = newton_gh(order);
  const std::size_t q = r.x.size();
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> xi(m);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t a = 0; a < m; ++a) {
      xi[a] = r.x[idx[a]];
      w *= r.w[idx[a]];
    }
    total += w * f(std::span<const double>(xi));
    std::size_t a = 0;
    while (a < m && ++idx[a] == q) idx[a++] = 0;
    if (a == m) break;
  }
  return total;
}

// Explicit He_k by the monomial formula He_k(x) = k! sum_j (-1)^j x^{k-2j} / (j! (k-2j)! 2^j).
double he_explicit(int k, double x) {
  double s = 0.0;
  for (int j = 0; 2 * j <= k; ++j) {
    s += std::pow(-1.0, j) * std::tgamma(k + 1.0) * std::pow(x, k - 2 * j) /
         (std::tgamma(j + 1.0) * std::tgamma(k - 2 * j + 1.0) * std::pow(2.0, j));
  }
  return s;
}

// Brute-force evaluation: sum over all full multi-indices of A[i] prod He over
// the multiplicities; the full-tensor sum counts each sorted index k!/prod n! times.
double brute_eval(const ChaosVector& c, std::span<const double> xi) {
  const std::size_t m = c.dim();
  double total = 0.0;
  for (int k = 0; k <= c.order(); ++k) {
    const auto full = c.coeff(k).to_full();
    for (std::size_t flat = 0; flat < full.size(); ++flat) {
      std::vector<int> cnt(m, 0);
      std::size_t f = flat;
      for (int p = 0; p < k; ++p) {
        cnt[f % m]++;
        f /= m;
      }
      double term = full[flat];
      for (std::size_t a = 0; a < m; ++a) term *= he_explicit(cnt[a], xi[a]);
      total += term;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("hermite polynomials match the explicit formula") {
  CHECK(hermite(0, 3.7) == doctest::Approx(1.0));
  CHECK(hermite(2, 2.0) == doctest::Approx(3.0));
  // He_5(x) = x^5 - 10x^3 + 15x
  CHECK(hermite(5, 1.0) == doctest::Approx(6.0));
  for (int k = 0; k <= 10; ++k) {
    for (double x : {-2.3, -0.4, 0.0, 0.9, 1.7}) {
      CHECK(hermite(k, x) == doctest::Approx(he_explicit(k, x)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(hermite(-1, 0.0), std::invalid_argument);
}

TEST_CASE("hermite product linearization") {
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; b <= 4; ++b) {
      const auto coef = hermite_product(a, b);
      REQUIRE(coef.size() == static_cast<std::size_t>(a + b + 1));
      for (double x : {-1.1, 0.3, 2.0}) {
        double s = 0.0;
        for (int d = 0; d <= a + b; ++d) s += coef[d] * he_explicit(d, x);
        CHECK(s == doctest::Approx(he_explicit(a, x) * he_explicit(b, x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("independent Gauss-Hermite rule agrees with the library rule") {
  const Rule r = newton_gh(12);
  const auto& q = gauss_hermite(12);
  REQUIRE(r.x.size() == 12);
  REQUIRE(q.nodes.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(q.nodes[i] == doctest::Approx(r.x[i]).epsilon(1e-12));
    CHECK(q.weights[i] == doctest::Approx(r.w[i]).epsilon(1e-10));
  }
  // E Z^4 = 3, E Z^6 = 15
  CHECK(normal_expect([](double z) { return z * z * z * z; }, 0.0, 1.0, 10) == doctest::Approx(3.0));
  CHECK(normal_expect([](double z) { return std::pow(z, 6); }, 0.0, 1.0, 10) == doctest::Approx(15.0));
  CHECK(integrate_gl([](double t) { return std::exp(t); }, 0.0, 1.0, 2, 10) == doctest::Approx(std::exp(1.0) - 1.0));
}

TEST_CASE("symmetric tensor ranks are colex and dimension independent") {
  std::size_t expected = 0;
  SymmetricTensor::for_each_index(4, 3, [&](std::size_t r, std::span<const int> idx) {
    CHECK(r == expected++);
    CHECK(SymmetricTensor::rank(idx) == r);
  });
  CHECK(expected == SymmetricTensor::count(4, 3));
  CHECK(SymmetricTensor::count(4, 3) == 20);  // C(6,3)
  // A multi-index over coordinates < 3 keeps its rank in dimension 5.
  SymmetricTensor::for_each_index(3, 2, [&](std::size_t r, std::span<const int> idx) {
    std::size_t r5 = 0;
    bool found = false;
    SymmetricTensor::for_each_index(5, 2, [&](std::size_t s, std::span<const int> j) {
      if (!found && std::equal(idx.begin(), idx.end(), j.begin())) {
        r5 = s;
        found = true;
      }
    });
    CHECK(found);
    CHECK(r5 == r);
  });
  const int idx[] = {0, 0, 1};
  CHECK(SymmetricTensor::multiplicity(idx) == doctest::Approx(3.0));
}

TEST_CASE("symmetric tensor full round trip and norm") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  SymmetricTensor t(3, 3);
  for (double& v : t.values()) v = nd(rng);
  const auto full = t.to_full();
  double n2 = 0.0;
  for (double v : full) n2 += v * v;
  CHECK(t.norm2() == doctest::Approx(n2));
  const auto back = SymmetricTensor::from_full(3, 3, full);
  for (std::size_t r = 0; r < t.size(); ++r) CHECK(back[r] == doctest::Approx(t[r]));
  const int a[] = {2, 0, 1};
  const int b[] = {0, 1, 2};
  CHECK(t.at(a) == t.at(b));
}

TEST_CASE("contract_modes matches brute-force full contraction") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int k = 0; k <= 4; ++k) {
    for (auto [m, mo] : {std::pair<int, int>{3, 3}, {3, 2}, {2, 4}}) {
      SymmetricTensor t(m, k);
      for (double& v : t.values()) v = nd(rng);
      Eigen::MatrixXd M(m, mo);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < mo; ++j) M(i, j) = nd(rng);
      const auto full = t.to_full();
      std::size_t out_size = 1;
      for (int p = 0; p < k; ++p) out_size *= mo;
      std::vector<double> out(out_size, 0.0);
      for (std::size_t o = 0; o < out_size; ++o) {
        for (std::size_t in = 0; in < full.size(); ++in) {
          double w = full[in];
          std::size_t fo = o, fi = in;
          for (int p = 0; p < k; ++p) {
            w *= M(static_cast<int>(fi % m), static_cast<int>(fo % mo));
            fo /= mo;
            fi /= m;
          }
          out[o] += w;
        }
      }
      const auto got = t.contract_modes(M).to_full();
      REQUIRE(got.size() == out.size());
      for (std::size_t o = 0; o < out.size(); ++o) CHECK(got[o] == doctest::Approx(out[o]).epsilon(1e-12));
    }
  }
}

TEST_CASE("chaos evaluation") {
  const double phi[] = {0.5, -1.0};
  const double xi[] = {1.2, 0.3};
  auto c = ChaosVector::linear(phi, 2);
  CHECK(chaos_eval(c, xi) == doctest::Approx(0.5 * 1.2 - 0.3));
  ChaosVector h2(2, 2);
  const int i00[] = {0, 0};
  h2.coeff(2).set(i00, 1.0);
  CHECK(chaos_eval(h2, xi) == doctest::Approx(1.2 * 1.2 - 1.0));

  std::mt19937_64 rng(3);
  const auto r = random_chaos(3, 4, rng);
  const double x3[] = {0.7, -1.4, 0.2};
  CHECK(chaos_eval(r, x3) == doctest::Approx(brute_eval(r, x3)).epsilon(1e-12));
  ChaosEvaluator ev(r);
  CHECK(ev(x3) == doctest::Approx(brute_eval(r, x3)).epsilon(1e-12));
}

TEST_CASE("second moments agree with an independent quadrature") {
  ChaosVector h3(1, 3);
  const int i000[] = {0, 0, 0};
  h3.coeff(3).set(i000, 1.0);
  CHECK(moment2(h3) == doctest::Approx(6.0));
  CHECK(moment2(ChaosVector(3, 2)) == 0.0);
  const double phi[] = {0.3, 0.4};
  CHECK(moment2(ChaosVector::linear(phi, 1)) == doctest::Approx(0.25));

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = random_chaos(3, 3, rng);
    const auto b = random_chaos(3, 3, rng);
    const double qa = brute_expect([&](std::span<const double> x) { return std::pow(brute_eval(a, x), 2); }, 3, 7);
    CHECK(moment2(a) == doctest::Approx(qa).epsilon(1e-10));
    const double qab = brute_expect([&](std::span<const double> x) { return brute_eval(a, x) * brute_eval(b, x); }, 3, 7);
    CHECK(expect_product(a, b) == doctest::Approx(qab).epsilon(1e-10));
    CHECK(gh_expect([&](std::span<const double> x) { return chaos_eval(a, x); }, 3, 6) ==
          doctest::Approx(a.mean()).epsilon(1e-12));
  }
}

TEST_CASE("wick exponential") {
  const double zero[] = {0.0, 0.0};
  const auto w0 = wick_exp(zero, 5);
  CHECK(w0.mean() == 1.0);
  CHECK(moment2(w0) == doctest::Approx(1.0));

  const double phi[] = {0.4, -0.3, 0.2};
  const auto w = wick_exp(phi, 20);
  const double s = 0.16 + 0.09 + 0.04;
  const double x[] = {0.5, 1.1, -0.8};
  const double exact = std::exp(0.4 * 0.5 - 0.3 * 1.1 - 0.2 * 0.8 - 0.5 * s);
  CHECK(chaos_eval(w, x) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(moment2(w) == doctest::Approx(std::exp(s)).epsilon(1e-12));

  // pairing with a degree-1 chaos is the inner product
  const double psi[] = {1.0, 2.0, -0.5};
  CHECK(pair_wick(ChaosVector::linear(psi, 1), phi) == doctest::Approx(0.4 - 0.6 - 0.1));

  // E[c exp((phi, xi) - |phi|^2/2)] by independent quadrature
  std::mt19937_64 rng(21);
  const auto c = random_chaos(3, 3, rng);
  const double q = brute_expect(
      [&](std::span<const double> xi) {
        double dot = 0.0;
        for (int a = 0; a < 3; ++a) dot += phi[a] * xi[a];
        return brute_eval(c, xi) * std::exp(dot - 0.5 * s);
      },
      3, 24);
  CHECK(pair_wick(c, phi) == doctest::Approx(q).epsilon(1e-10));

  const double big[] = {3.0, 3.0};
  CHECK_THROWS_AS(wick_exp(big, 3, 1e-10), std::domain_error);
  CHECK(wick_tail_bound(0.0, 2) == 0.0);
}

TEST_CASE("stochastic derivative of simple chaoses") {
  ChaosVector c(2, 2);
  const int i00[] = {0, 0};
  c.coeff(2).set(i00, 1.0);  // He_2(xi_0)
  const auto d = stoch_derivative(c);
  REQUIRE(d.free_dim() == 2);
  // D (xi_0^2 - 1) = 2 xi_0 e_0
  CHECK(d[0].coeff(1)[0] == doctest::Approx(2.0));
  CHECK(d[0].coeff(1)[1] == doctest::Approx(0.0));
  CHECK(d[1].max_degree() == -1);

  const double phi[] = {0.5, -2.0};
  const auto dl = stoch_derivative(ChaosVector::linear(phi, 1));
  CHECK(dl[0].mean() == doctest::Approx(0.5));
  CHECK(dl[1].mean() == doctest::Approx(-2.0));
  CHECK(stoch_derivative(ChaosVector::constant(2, 1, 3.0))[0].max_degree() == -1);
}

TEST_CASE("derivative matches finite differences of the evaluation") {
  std::mt19937_64 rng(4);
  const auto c = random_chaos(3, 3, rng);
  const double h[] = {0.3, -0.7, 1.1};
  const double x[] = {0.2, -0.5, 0.9};
  const auto dc = derivative_along(c, h);
  const double eps = 1e-5;
  double xp[3], xm[3];
  for (int a = 0; a < 3; ++a) {
    xp[a] = x[a] + eps * h[a];
    xm[a] = x[a] - eps * h[a];
  }
  const double fd = (brute_eval(c, xp) - brute_eval(c, xm)) / (2 * eps);
  CHECK(chaos_eval(dc, x) == doctest::Approx(fd).epsilon(1e-7));
  // shift is evaluation at xi + psi
  const double xs[] = {x[0] + h[0], x[1] + h[1], x[2] + h[2]};
  CHECK(chaos_eval(shift(c, h), x) == doctest::Approx(brute_eval(c, xs)).epsilon(1e-10));
}

TEST_CASE("skorokhod integral of simple integrands") {
  const std::size_t m = 3;
  const int N = 4;
  auto e = [&](std::size_t j) {
    std::vector<double> v(m, 0.0);
    v[j] = 1.0;
    return ChaosVector::linear(v, N);
  };
  const double xi[] = {0.8, -1.3, 0.45};

  // deterministic integrand: (h, xi)
  const double h[] = {0.2, -0.4, 1.5};
  const auto dh = skorokhod(HChaosVector::deterministic(h, m, N));
  CHECK(chaos_eval(dh, xi) == doctest::Approx(0.2 * 0.8 + 0.4 * 1.3 + 1.5 * 0.45));

  // x_j = xi_j: sum (xi_j^2 - 1)
  HChaosVector x(m, m, N);
  for (std::size_t j = 0; j < m; ++j) x[j] = e(j);
  double expect = 0.0;
  for (double v : xi) expect += v * v - 1.0;
  CHECK(chaos_eval(skorokhod(x), xi) == doctest::Approx(expect));

  // adapted integrand reduces to the Ito sum sum_j x_j xi_j
  HChaosVector a(m, m, N);
  a[0] = ChaosVector::constant(m, N, 1.0);
  a[1] = e(0);
  a[2] = multiply(e(0), e(1), N);
  const double ito = xi[0] + xi[0] * xi[1] + xi[0] * xi[1] * xi[2];
  CHECK(chaos_eval(skorokhod(a), xi) == doctest::Approx(ito));

  // duality E[F delta(x)] = E[(DF, x)]
  std::mt19937_64 rng(8);
  HChaosVector r(m, m, N);
  for (std::size_t j = 0; j < m; ++j) r[j] = random_chaos(m, N - 1, rng).with_order(N);
  const auto F = random_chaos(m, N, rng);
  CHECK(expect_product(F, skorokhod(r)) == doctest::Approx(expect_product(stoch_derivative(F), r)).epsilon(1e-12));

  HChaosVector top(m, m, 2);
  top[0] = multiply(e(0), e(1), 2);
  CHECK_THROWS(skorokhod(top));
}

TEST_CASE("products and contractions agree with pointwise evaluation") {
  std::mt19937_64 rng(12);
  const auto a = random_chaos(3, 2, rng);
  const auto b = random_chaos(3, 3, rng);
  const auto ab = multiply(a, b);
  CHECK(ab.order() == 5);
  const double x[] = {0.3, -1.2, 0.7};
  CHECK(chaos_eval(ab, x) == doctest::Approx(brute_eval(a, x) * brute_eval(b, x)).epsilon(1e-10));
  CHECK_THROWS(multiply(a, b, 3));

  // (1/k!) D^k c (h,...,h) is the k-th Taylor coefficient of t -> c(xi + t h)
  const double h[] = {0.5, 0.1, -0.2};
  const auto c = random_chaos(3, 4, rng);
  const double t = 0.37;
  double taylor = 0.0;
  for (int k = 0; k <= 4; ++k) taylor += std::pow(t, k) * chaos_eval(contract_direction(c, h, k), x);
  const double xt[] = {x[0] + t * h[0], x[1] + t * h[1], x[2] + t * h[2]};
  CHECK(taylor == doctest::Approx(brute_eval(c, xt)).epsilon(1e-10));

  // contract_noise with an orthogonal map is evaluation at M^T xi
  Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(3, 3)).householderQ();
  const auto cq = contract_noise(c, Q);
  Eigen::Vector3d xv(x[0], x[1], x[2]);
  const Eigen::Vector3d y = Q * xv;
  // (A(Q.,..), He(xi)) = (A, He(Q xi)) for orthogonal Q
  CHECK(chaos_eval(cq, x) == doctest::Approx(brute_eval(c, std::span<const double>(y.data(), 3))).epsilon(1e-10));
}

TEST_CASE("inner products of H-valued chaoses") {
  std::mt19937_64 rng(14);
  HChaosVector x(2, 2, 2), y(2, 2, 2);
  for (std::size_t s = 0; s < 2; ++s) {
    x[s] = random_chaos(2, 2, rng);
    y[s] = random_chaos(2, 2, rng);
  }
  const auto xy = inner(x, y);
  const double p[] = {0.6, -0.9};
  CHECK(chaos_eval(xy, p) ==
        doctest::Approx(brute_eval(x[0], p) * brute_eval(y[0], p) + brute_eval(x[1], p) * brute_eval(y[1], p)));
  CHECK(xy.mean() == doctest::Approx(expect_product(x, y)));
  CHECK(moment2(x) == doctest::Approx(moment2(x[0]) + moment2(x[1])));
}

TEST_CASE("linear algebra helpers") {
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 1.0, 1.0, 2.0;
  const auto R = psd_sqrt(A);
  CHECK((R * R - A).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(operator_norm(A) == doctest::Approx(3.0));
  Eigen::MatrixXd B(2, 2);
  B << 1.0, 0.0, 0.0, -1e-11;
  CHECK(psd_sqrt(B)(1, 1) == 0.0);
  B(1, 1) = -1e-6;
  CHECK_THROWS_AS(psd_sqrt(B), std::domain_error);
}

TEST_CASE("time grid") {
  TimeGrid g(2.0, 8);
  CHECK(g.dt() == doctest::Approx(0.25));
  CHECK(g.sqrt_dt() == doctest::Approx(0.5));
  CHECK(g.time(3) == doctest::Approx(0.75));
  CHECK(g.cells_until(1.5) == 6);
  CHECK_THROWS_AS(g.cells_until(0.3), std::invalid_argument);
  CHECK_THROWS_AS(g.cells_until(2.5), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
}

TEST_CASE("Monte Carlo estimates are reproducible and thread-count independent") {
  auto sample = [](Rng& r) {
    const double z = r.normal();
    return z * z;
  };
  setenv("CHAOSFLOW_THREADS", "1", 1);
  const auto e1 = mc_estimate(5000, 42, sample);
  setenv("CHAOSFLOW_THREADS", "4", 1);
  const auto e4 = mc_estimate(5000, 42, sample);
  unsetenv("CHAOSFLOW_THREADS");
  CHECK(e1.value == e4.value);
  CHECK(e1.std_error == e4.std_error);
  CHECK(e1.n == 5000);
  CHECK(std::abs(e1.value - 1.0) < 4.0 * e1.std_error);
  // chunk streams differ
  CHECK(chunk_seed(42, 0) != chunk_seed(42, 1));
  CHECK(combined_se({0.0, 3.0, 1}, {0.0, 4.0, 1}) == doctest::Approx(5.0));
}
