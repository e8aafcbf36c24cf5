#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/linalg.h"
#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/core/quadrature.h"
#include "chaosflow/experiments/experiments.h"
#include "chaosflow/integrators/fbm.h"
#include "chaosflow/integrators/gsro.h"
#include "chaosflow/smoothing/joint_model.h"
#include "chaosflow/sq/second_quant.h"

namespace chaosflow::experiments {

namespace {

std::size_t uniform_index(core::Rng& rng, std::size_t lo, std::size_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return std::min(hi, lo + static_cast<std::size_t>(rng.uniform() * span));
}

std::string case_name(const std::string& suite, std::size_t i) { return suite + "/case-" + std::to_string(i); }

Eigen::MatrixXd random_matrix(std::size_t rows, std::size_t cols, core::Rng& rng) {
  Eigen::MatrixXd G(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < G.cols(); ++j) {
    for (Eigen::Index i = 0; i < G.rows(); ++i) G(i, j) = rng.normal();
  }
  return G;
}

// Cycles through identity, zero, a random rank-one projector, a scalar and a generic contraction.
Eigen::MatrixXd random_contraction(std::size_t m, std::size_t i, core::Rng& rng) {
  const auto md = static_cast<Eigen::Index>(m);
  switch (i % 5) {
    case 0:
      return Eigen::MatrixXd::Identity(md, md);
    case 1:
      return Eigen::MatrixXd::Zero(md, md);
    case 2: {
      Eigen::VectorXd e = random_matrix(m, 1, rng).col(0);
      e /= e.norm();
      return e * e.transpose();
    }
    case 3:
      return (2.0 * rng.uniform() - 1.0) * Eigen::MatrixXd::Identity(md, md);
    default: {
      const Eigen::MatrixXd G = random_matrix(m, m, rng);
      return (rng.uniform() / core::operator_norm(G)) * G;
    }
  }
}

core::HChaosVector random_hchaos(std::size_t free_dim, std::size_t dim, int order, core::Rng& rng) {
  core::HChaosVector x(free_dim, dim, order);
  for (std::size_t s = 0; s < free_dim; ++s) x[s] = core::random_chaos(dim, order, rng.engine());
  return x;
}

core::HChaosVector raise_order(const core::HChaosVector& x, int order) {
  core::HChaosVector out(x.free_dim(), x.dim(), order);
  for (std::size_t s = 0; s < x.free_dim(); ++s) out[s] = x[s].with_order(order);
  return out;
}

// Smallest order whose Wick tail bound is below tol.
int wick_order(double phi_norm2, double tol) {
  int N = 0;
  while (!(core::wick_tail_bound(phi_norm2, N) < tol)) ++N;
  return N;
}

bool has_suite(const Json& config, const std::string& name) {
  for (const auto& s : config["suites"]) {
    if (s.get<std::string>() == name) return true;
  }
  return false;
}

void validate_suites(const Json& config) {
  static const char* known[] = {"duality", "wick", "gamma-mc", "intertwining", "integrator", "skorokhod"};
  for (const auto& s : config["suites"]) {
    if (!s.is_string()) throw ConfigError("key 'suites' must list strings");
    bool ok = false;
    for (const char* k : known) ok = ok || s.get<std::string>() == k;
    if (!ok) throw ConfigError("unknown suite '" + s.get<std::string>() + "' in 'suites'");
  }
}

// 2m x 2m block sizes are small here; V gets a random norm below 0.9, or 0 (S = I) every tenth case.
smoothing::JointModel random_joint(std::size_t m, std::size_t i, core::Rng& rng) {
  const auto md = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(md, md);
  if (i % 10 != 0) {
    const Eigen::MatrixXd G = random_matrix(m, m, rng);
    V = (0.9 * rng.uniform() / core::operator_norm(G)) * G;
  }
  return smoothing::build_joint(V, core::TimeGrid(1.0, m));
}

void duality_suite(ExperimentResult& res, const Json& config, core::Rng& rng) {
  const std::size_t cases = get_size(config, "cases");
  const double tol = get_double(config, "tolerance");
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t m = uniform_index(rng, 1, 2);
    const auto model = random_joint(m, i, rng);
    const std::size_t d = 2 * m;
    const int na = static_cast<int>(uniform_index(rng, 0, 3));
    const int nx = static_cast<int>(uniform_index(rng, 0, 2));
    const auto alpha = core::random_chaos(d, na, rng.engine());
    const auto x = raise_order(random_hchaos(d, d, nx, rng), nx + 1);
    const double lhs = core::expect_product(smoothing::d_xi(model, alpha), x);
    const double rhs = core::expect_product(alpha, smoothing::j_integral(model, x));
    res.check(case_name("duality", i), lhs, 0.0, rhs, tol * std::max(1.0, std::abs(rhs)));
  }
}

void wick_suite(ExperimentResult& res, const Json& config, core::Rng& rng) {
  const std::size_t cases = get_size(config, "cases");
  const std::size_t max_dim = get_size(config, "max_dim");
  const double tol = get_double(config, "tolerance");
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t m = uniform_index(rng, 1, max_dim);
    const sq::BoundedOp C(random_contraction(m, i, rng));
    Eigen::VectorXd phi = random_matrix(m, 1, rng).col(0);
    phi *= 1.2 * rng.uniform() / std::max(phi.norm(), 1e-12);
    Eigen::VectorXd psi = random_matrix(m, 1, rng).col(0);
    psi *= rng.uniform() / std::max(psi.norm(), 1e-12);
    const int N = wick_order(phi.squaredNorm(), tol);
    const auto E = core::wick_exp(std::span<const double>(phi.data(), m), N, tol);
    const auto G = sq::gamma_apply(C, E);
    const double paired = core::pair_wick(G, std::span<const double>(psi.data(), m));
    const double a = (C.matrix().transpose() * phi).dot(psi);
    // exact: E[wick(C^T phi) wick(psi)] = exp((C^T phi, psi)); the truncated pairing misses sum_{k>N} a^k/k!
    double tail = 0.0, term = 1.0;
    for (int k = 1; k <= N + 60; ++k) {
      term *= std::abs(a) / k;
      if (k > N) tail += term;
    }
    const double exact = std::exp(a);
    res.check(case_name("wick", i), paired, 0.0, exact, tail + 1e-12 * exact);
  }
}

void gamma_mc_suite(ExperimentResult& res, const Json& config, core::Rng& rng) {
  const std::size_t trials = get_size(config, "gamma_mc_trials");
  const std::size_t min_pass = get_size(config, "gamma_mc_min_pass");
  const std::size_t m = get_size(config, "gamma_mc_dim");
  const int order = get_int(config, "gamma_mc_order");
  const std::size_t n = get_size(config, "n");
  const std::uint64_t seed = get_u64(config, "seed");
  if (m == 0 || order < 0 || min_pass > trials) throw ConfigError("gamma_mc_* settings are inconsistent");
  std::size_t within = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const sq::BoundedOp C(random_contraction(m, i, rng));
    const auto c = core::random_chaos(m, order, rng.engine());
    std::vector<double> xi(m);
    rng.fill_normal(xi);
    const core::ChaosEvaluator F(c);
    const auto est = sq::gamma_mc(C, [&](std::span<const double> eta) { return F(eta); }, xi, n,
                                  core::chunk_seed(seed, 1000 + i));
    const double oracle = core::chaos_eval(sq::gamma_apply(C, c), xi);
    const bool ok = std::abs(est.value - oracle) <= 3.0 * est.std_error;
    within += ok ? 1 : 0;
    res.info(case_name("gamma-mc", i), est.value, est.std_error, oracle);
  }
  res.assert_row("gamma-mc/within-3se-count", static_cast<double>(within), 0.0, static_cast<double>(trials),
                 static_cast<double>(trials - min_pass), within >= min_pass);
}

void intertwining_suite(ExperimentResult& res, const Json& config, core::Rng& rng) {
  const std::size_t cases = get_size(config, "cases");
  const std::size_t max_dim = get_size(config, "max_dim");
  const double tol = get_double(config, "tolerance");
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t m = uniform_index(rng, 1, max_dim);
    const std::size_t in = uniform_index(rng, 1, 3);
    const std::size_t out = uniform_index(rng, 1, 3);
    const int N = static_cast<int>(uniform_index(rng, 0, 2));
    integrators::Gsro A;
    A.alpha0 = random_matrix(out, in, rng);
    for (std::size_t a = 0; a < in; ++a) A.alpha1.push_back(random_matrix(out, m, rng));
    const sq::BoundedOp C(random_contraction(m, i, rng));
    const auto x = raise_order(random_hchaos(in, m, N, rng), N + 1);
    const double r = std::sqrt(integrators::intertwine_check(A, C, x));
    res.check(case_name("intertwining", i), r, 0.0, 0.0, tol);
  }
}

void integrator_suite(ExperimentResult& res, const Json& config, core::Rng& rng) {
  const std::size_t cells = get_size(config, "integrator_cells");
  const std::size_t trials = get_size(config, "integrator_trials");
  const double tol = get_double(config, "integrator_tolerance");
  const std::uint64_t seed = get_u64(config, "seed");
  if (cells == 0 || trials == 0) throw ConfigError("integrator_cells and integrator_trials must be positive");
  std::vector<std::pair<std::string, Eigen::MatrixXd>> ops;
  for (const auto& spec : config["operators"]) ops.emplace_back(spec["kind"].get<std::string>(), operator_matrix(spec, cells));
  for (std::size_t r = 0; r < 3; ++r) ops.emplace_back("random", random_contraction(cells, 4, rng));
  const core::TimeGrid grid(1.0, cells);
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const integrators::IntegratorProcess g(sq::BoundedOp(ops[k].second), grid);
    const auto b = integrators::integrator_bound(g, trials, core::chunk_seed(seed, 2000 + k));
    const std::string id = "integrator/" + std::to_string(k) + "-" + ops[k].first;
    res.assert_row(id, b.max_ratio, 0.0, 1.0, tol, b.max_ratio <= 1.0 + tol);
    res.info(id + "/norm-squared", b.sup_ratio);
  }
}

void skorokhod_suite(ExperimentResult& res, const Json& config, core::Rng& rng) {
  const std::size_t cases = get_size(config, "cases");
  const double tol = get_double(config, "tolerance");
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t m = uniform_index(rng, 1, 2);
    const auto model = random_joint(m, i, rng);
    const std::size_t d = 2 * m;
    const auto a = core::random_chaos(d, static_cast<int>(uniform_index(rng, 0, 2)), rng.engine());
    const auto x = random_hchaos(d, d, static_cast<int>(uniform_index(rng, 0, 1)), rng);
    const Eigen::VectorXd h = random_matrix(d, 1, rng).col(0);
    const auto r = smoothing::skorokhod_identities(a, x, std::span<const double>(h.data(), d), model);
    res.check(case_name("skorokhod", i) + "/product", r.first, 0.0, 0.0, tol);
    res.check(case_name("skorokhod", i) + "/derivative", r.second, 0.0, 0.0, tol);
  }
}

}  // namespace

ExperimentResult run_isometry_suite(const Json& config) {
  ExperimentResult res{"isometry-suite", {}, {}};
  const std::size_t cases = get_size(config, "n");
  const std::size_t max_dim = get_size(config, "max_dim");
  const int max_order = get_int(config, "max_order");
  const int q = get_int(config, "quad_order");
  const double tol = get_double(config, "tolerance");
  const double time_limit = get_double(config, "time_limit");
  if (max_dim == 0 || max_order < 0) throw ConfigError("max_dim must be positive and max_order non-negative");
  // the square has degree 2N per coordinate; Gauss-Hermite with q nodes is exact up to degree 2q - 1
  if (2 * q - 1 < 2 * max_order) throw ConfigError("quad_order must be at least max_order + 1 for exactness");
  core::Rng rng(get_u64(config, "seed"));
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t m = uniform_index(rng, 1, max_dim);
    const int N = static_cast<int>(uniform_index(rng, 0, static_cast<std::size_t>(max_order)));
    const auto c = core::random_chaos(m, N, rng.engine());
    const core::ChaosEvaluator F(c);
    const double quad = core::gh_expect([&](std::span<const double> x) { const double v = F(x); return v * v; }, m, q);
    res.check("case-" + std::to_string(i) + "/m" + std::to_string(m) + "-N" + std::to_string(N), core::moment2(c), 0.0,
              quad, tol);
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // wall time is machine dependent, so it is asserted but not printed in the CSV
  res.assert_row("runtime-within-limit", elapsed <= time_limit ? 1.0 : 0.0, 0.0, 1.0, 0.0, elapsed <= time_limit);
  return res;
}

ExperimentResult run_identities(const Json& config) {
  ExperimentResult res{"identities", {}, {}};
  validate_suites(config);
  const std::uint64_t seed = get_u64(config, "seed");
  // each suite has its own stream so that selecting suites does not change the cases
  auto stream = [&](std::uint64_t k) { return core::Rng(core::chunk_seed(seed, k)); };
  if (has_suite(config, "duality")) { auto r = stream(1); duality_suite(res, config, r); }
  if (has_suite(config, "wick")) { auto r = stream(2); wick_suite(res, config, r); }
  if (has_suite(config, "gamma-mc")) { auto r = stream(3); gamma_mc_suite(res, config, r); }
  if (has_suite(config, "intertwining")) { auto r = stream(4); intertwining_suite(res, config, r); }
  if (has_suite(config, "integrator")) { auto r = stream(5); integrator_suite(res, config, r); }
  if (has_suite(config, "skorokhod")) { auto r = stream(6); skorokhod_suite(res, config, r); }
  return res;
}

ExperimentResult run_fbm(const Json& config) {
  ExperimentResult res{"fbm", {}, {}};
  integrators::FbmSpec spec;
  spec.alpha = get_double(config, "alpha");
  spec.grid = core::TimeGrid(get_double(config, "horizon"), get_size(config, "cells"));
  spec.refine = get_size(config, "refine");
  spec.quad_order = get_int(config, "quad_order");
  const double sigmas = get_double(config, "sigmas");
  const double var_tol = get_double(config, "variance_tolerance");
  const integrators::FbmKernel K(spec);
  const Eigen::MatrixXd& P = K.path_kernels();
  const auto m = static_cast<std::size_t>(P.rows());
  const auto fine = static_cast<std::size_t>(P.cols());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i <= j; ++i) pairs.emplace_back(i, j);
  }
  const auto est = core::mc_estimate(get_size(config, "n"), get_u64(config, "seed"), pairs.size(),
                                     [&](core::Rng& rng, std::span<double> out) {
                                       Eigen::VectorXd xi(static_cast<Eigen::Index>(fine));
                                       rng.fill_normal(std::span<double>(xi.data(), fine));
                                       const Eigen::VectorXd B = P * xi;
                                       for (std::size_t p = 0; p < pairs.size(); ++p) {
                                         out[p] = B(static_cast<Eigen::Index>(pairs[p].first)) *
                                                  B(static_cast<Eigen::Index>(pairs[p].second));
                                       }
                                     });
  const auto& grid = spec.grid;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const double R = integrators::fbm_covariance(spec.alpha, grid.time(i + 1), grid.time(j + 1));
    res.check("covariance/t" + std::to_string(i + 1) + "-t" + std::to_string(j + 1), est[p].value, est[p].std_error,
              R, sigmas * est[p].std_error);
    if (i == j) res.plot.push_back({"variance", grid.time(i + 1), est[p].value, est[p].std_error});
  }
  const double T = grid.horizon();
  const double target = std::pow(T, 2.0 * spec.alpha);
  const auto& last = est.back();
  res.check("variance-at-horizon/sampled", last.value, last.std_error, target, var_tol * target);
  res.check("variance-at-horizon/kernel", P.row(static_cast<Eigen::Index>(m) - 1).squaredNorm(), 0.0, target,
            var_tol * target);
  // near alpha = 1/2 the kernel approaches the Brownian indicator and R(s,t) approaches min(s,t)
  integrators::FbmSpec lim = spec;
  lim.alpha = get_double(config, "limit_alpha");
  const integrators::FbmKernel KL(lim);
  const Eigen::MatrixXd G = KL.path_kernels() * KL.path_kernels().transpose();
  double dev = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      dev = std::max(dev, std::abs(G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                   std::min(grid.time(i + 1), grid.time(j + 1))));
    }
  }
  res.info("limit/max-deviation-from-brownian-covariance", dev);
  return res;
}

}  // namespace chaosflow::experiments
