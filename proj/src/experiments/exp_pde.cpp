#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chaosflow/core/chaos.h"
#include "chaosflow/core/hermite.h"
#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/core/quadrature.h"
#include "chaosflow/experiments/experiments.h"
#include "chaosflow/pde/bvp1d.h"
#include "chaosflow/pde/bvp3.h"
#include "chaosflow/pde/hitting.h"
#include "chaosflow/pde/killed.h"
#include "chaosflow/pde/linear_sde.h"
#include "chaosflow/pde/weak.h"
#include "chaosflow/sq/second_quant.h"

namespace chaosflow::experiments {

namespace {

std::string num(double v) { return format_number(v); }

std::vector<double> doubles(const Json& config, const std::string& key) {
  std::vector<double> out;
  for (const auto& v : config[key]) {
    if (!v.is_number()) throw ConfigError("key '" + key + "' must list numbers");
    out.push_back(v.get<double>());
  }
  if (out.empty()) throw ConfigError("key '" + key + "' must not be empty");
  return out;
}

double observed_order(double coarse, double fine, double ratio) { return std::log(coarse / fine) / std::log(ratio); }

// Bias bound for a scheme of weak order >= 1/2 from the fine/coarse difference d (with its standard error):
// bias(fine) <= (|d| + 2 se) / (sqrt2 - 1).
double discretization_bound(const core::Estimate& diff) {
  return (std::abs(diff.value) + 2.0 * diff.std_error) / (std::sqrt(2.0) - 1.0);
}

// Coarse noise of half the cells: xi_c[j] = (xi[2j] + xi[2j+1]) / sqrt2.
void coarsen(std::span<const double> xi, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (xi[2 * j] + xi[2 * j + 1]) / std::sqrt(2.0);
}

// Paired fine/coarse Monte Carlo of path(xi, dt, cells); returns the difference fine - coarse.
core::Estimate paired_difference(std::size_t cells, double dt, std::size_t n, std::uint64_t seed,
                                 const std::function<double(std::span<const double>, double)>& path) {
  if (cells % 2 != 0) throw ConfigError("cells must be even for the discretization bound");
  const auto est = core::mc_estimate(n, seed, 1, [&](core::Rng& rng, std::span<double> out) {
    std::vector<double> xi(cells), xc(cells / 2);
    rng.fill_normal(xi);
    coarsen(xi, xc);
    out[0] = path(xi, dt) - path(xc, 2.0 * dt);
  });
  return est[0];
}

bool is_projector_on_constant(const Eigen::MatrixXd& C) {
  const double e2 = 1.0 / static_cast<double>(C.rows());
  return (C.array() - e2).abs().maxCoeff() <= 1e-12;
}

bool is_scalar(const Eigen::MatrixXd& C, double c) {
  const auto m = C.rows();
  return (C - c * Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-12;
}

// d^k/dx^k exp(-x^2/2) = (-1)^k He_k(x) exp(-x^2/2)
double gaussian_derivative(int k, double x) {
  return ((k % 2 == 0) ? 1.0 : -1.0) * core::hermite(k, x) * std::exp(-0.5 * x * x);
}

}  // namespace

ExperimentResult run_cauchy_series(const Json& config) {
  ExperimentResult res{"cauchy-series", {}, {}};
  const std::size_t cases = get_size(config, "n");
  const std::size_t max_cells = get_size(config, "max_cells");
  const int max_order = get_int(config, "max_order");
  const double tol = get_double(config, "tolerance");
  const double T = get_double(config, "horizon");
  if (max_cells < 1 || max_order < 0 || !(T > 0.0)) throw ConfigError("max_cells, max_order and horizon must be positive");
  core::Rng rng(get_u64(config, "seed"));
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t m = 1 + std::min(max_cells - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_cells)));
    const core::TimeGrid grid(T, m);
    const int order = std::min(max_order, static_cast<int>(rng.uniform() * (max_order + 1)));
    auto alpha = core::random_chaos(m, order, rng.engine());
    alpha *= 0.5;
    const double a = 2.0 * rng.uniform() - 1.0;
    const double b = 3.0 * rng.uniform() - 1.5;
    const double t = grid.time(1 + std::min(m - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(m))));
    std::vector<double> xi(m);
    rng.fill_normal(xi);
    const auto z = pde::complex_linear_sde(a, b, alpha, grid, t, xi);
    const auto y = pde::matrix_series_solution(a, b, alpha, grid, t, xi);
    const double scale = std::max(1.0, std::abs(z));
    const std::string id = "series-vs-matrix/case-" + std::to_string(i);
    res.check(id + "/re", y[0], 0.0, z.real(), tol * scale);
    res.check(id + "/im", y[1], 0.0, z.imag(), tol * scale);
  }

  // weak form: U(x,t) for U(x,0) = phi(x) alpha with alpha = 1/2 + w(T) + ((w(T/2) - (w(T) - w(T/2)))^2 - T)/2
  const auto levels = doubles(config, "weak_levels");
  const auto xs = doubles(config, "weak_xs");
  const double h0 = get_double(config, "weak_h");
  const double min_order = get_double(config, "min_order");
  if (levels.size() < 2) throw ConfigError("weak_levels needs at least two grids");
  const std::vector<std::pair<std::string, std::function<double(double)>>> psis = {
      {"zero", [](double) { return 0.0; }},
      {"one", [](double) { return 1.0; }},
      {"sin", [T](double s) { return std::sin(2.0 * std::acos(-1.0) * s / T); }},
      {"linear", [T](double s) { return 2.0 * s / T - 1.0; }},
      {"cos", [](double s) { return std::cos(3.0 * s); }},
  };
  const pde::SmoothFn phi = gaussian_derivative;
  for (const auto& [pname, psi_fn] : psis) {
    std::vector<double> residuals;
    for (double lv : levels) {
      const auto m = static_cast<std::size_t>(lv);
      if (m < 2 || m % 2 != 0 || static_cast<double>(m) != lv) throw ConfigError("weak_levels must be even integers");
      const core::TimeGrid grid(T, m);
      const double h = h0 * levels.front() / lv;
      core::ChaosVector alpha(m, 2);
      alpha.coeff(0)[0] = 0.5;
      std::vector<double> g1(m), g2(m);
      for (std::size_t c = 0; c < m; ++c) {
        g1[c] = grid.sqrt_dt();
        g2[c] = (c < m / 2 ? 1.0 : -1.0) * grid.sqrt_dt();
      }
      for (std::size_t c = 0; c < m; ++c) alpha.coeff(1)[c] = g1[c];
      // (g2, xi)^2 - |g2|^2 has degree-2 kernel g2 (x) g2
      core::SymmetricTensor::for_each_index(m, 2, [&](std::size_t r, std::span<const int> idx) {
        alpha.coeff(2)[r] = 0.5 * g2[static_cast<std::size_t>(idx[0])] * g2[static_cast<std::size_t>(idx[1])];
      });
      std::vector<double> psi(m);
      for (std::size_t c = 0; c < m; ++c) {
        psi[c] = core::integrate_gl(psi_fn, grid.time(c), grid.time(c + 1), 1, 16) / grid.sqrt_dt();
      }
      std::vector<pde::CauchyPairing> pairs;
      pairs.reserve(m + 1);
      for (std::size_t i = 0; i <= m; ++i) pairs.emplace_back(alpha, grid, psi, grid.time(i));
      const pde::PairedField U = [&](double x, std::size_t i) { return pairs[i](phi, x); };
      const double r = pde::wick_pde_residual(U, grid, psi, pde::WeakProblem{}, xs, h);
      residuals.push_back(r);
      res.info("weak/" + pname + "/residual-m" + std::to_string(m), r);
      res.plot.push_back({"weak-residual-" + pname, lv, r, 0.0});
    }
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
      const double p = observed_order(residuals[l], residuals[l + 1], levels[l + 1] / levels[l]);
      res.assert_row("weak/" + pname + "/order-m" + num(levels[l]) + "-m" + num(levels[l + 1]), p, 0.0, min_order, 0.0,
                     std::isfinite(p) && p >= min_order);
    }
  }
  return res;
}

ExperimentResult run_bvp3(const Json& config) {
  ExperimentResult res{"bvp3", {}, {}};
  const double t = get_double(config, "t");
  const double width = get_double(config, "width");
  const double pad = get_double(config, "pad");
  const double x_hi = get_double(config, "x_hi");
  const double ratio = get_double(config, "ds_over_h");
  const double min_order = get_double(config, "min_order");
  const auto hs = doubles(config, "h_levels");
  const auto etas = doubles(config, "etas");
  if (!(t > 0.0) || !(width > 0.0) || !(ratio > 0.0) || !(x_hi > 0.0)) throw ConfigError("t, width, ds_over_h, x_hi must be positive");
  pde::Bvp3Options opt;
  opt.depth = get_int(config, "depth");
  opt.horizon = get_double(config, "horizon");
  const double T = opt.horizon > 0.0 ? opt.horizon : 2.0 * t;
  const pde::RealFn f = [width](double y) { return 1.0 - std::exp(-std::pow(y / width, 3)); };
  auto make_grid = [&](double h) {
    pde::SpaceTimeGrid g;
    g.x_max = x_hi + pad * std::sqrt(t);
    g.h = h;
    g.t = t;
    g.steps = static_cast<std::size_t>(std::max(1.0, std::round(t / (ratio * h))));
    return g;
  };

  std::vector<double> residuals;
  std::vector<pde::HermiteSeriesField> fields;
  for (double h : hs) {
    fields.push_back(pde::bvp3_solve(f, make_grid(h), opt));
    residuals.push_back(pde::bvp3_residual(fields.back(), etas, x_hi, h));
    res.info("residual/h" + num(h), residuals.back());
    res.plot.push_back({"residual", h, residuals.back(), 0.0});
  }
  for (std::size_t l = 0; l + 1 < hs.size(); ++l) {
    const double p = observed_order(residuals[l], residuals[l + 1], hs[l] / hs[l + 1]);
    res.assert_row("residual-order/h" + num(hs[l]) + "-h" + num(hs[l + 1]), p, 0.0, min_order, 0.0,
                   std::isfinite(p) && p >= min_order);
  }

  const auto& F = fields.back();
  const auto& g = F.grid();
  double terminal = 0.0;
  // nodal values at s = t: sum_k H_k(eta) V_k(x_i, t)
  std::vector<double> He(static_cast<std::size_t>(F.depth()) + 1);
  for (double eta : etas) {
    core::hermite_table(eta, std::span<double>(He));
    for (std::size_t i = 0; i < g.points(); ++i) {
      double v = 0.0;
      for (int k = 0; k <= F.depth(); ++k) v += He[static_cast<std::size_t>(k)] * F.coeff(k)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g.steps));
      terminal = std::max(terminal, std::abs(v - f(g.x(i))));
    }
  }
  res.check("terminal-condition/max-abs-error", terminal, 0.0, 0.0, 0.0);

  const double cf_tol = get_double(config, "closed_form_tolerance");
  const auto FD = pde::bvp3_solve_fd(f, g, opt);
  for (int k = 0; k <= std::min(4, F.depth()); ++k) {
    for (double x : {0.5, 1.0, 2.0}) {
      const double cf = pde::bvp3_closed_form(f, f(0.0), t, T, k, x);
      const std::string id = "k" + std::to_string(k) + "/x" + num(x);
      res.check("closed-form/semigroup/" + id, F.coeff_at(k, x, 0), 0.0, cf, cf_tol);
      res.check("closed-form/crank-nicolson/" + id, FD.coeff_at(k, x, 0), 0.0, cf, cf_tol);
    }
  }

  // Chapman-Kolmogorov for the killed kernel
  const double ck_tol = get_double(config, "ck_tolerance");
  for (double s : {0.1, 0.5}) {
    for (double u : {0.2, 1.0}) {
      for (double x : {0.5, 2.0}) {
        const double y = 1.0;
        const double lhs = core::integrate_gl(
            [&](double z) { return pde::killed_kernel(s, x, z) * pde::killed_kernel(u, z, y); }, 0.0, 12.0, 240, 20);
        res.check("chapman-kolmogorov/s" + num(s) + "-t" + num(u) + "-x" + num(x), lhs, 0.0,
                  pde::killed_kernel(s + u, x, y), ck_tol);
      }
    }
  }

  // tower property: E_eta V(x, 0, eta) = V_0(x, 0) with eta standard normal
  const std::uint64_t seed = get_u64(config, "seed");
  const std::size_t n = get_size(config, "n");
  std::size_t idx = 0;
  for (double x : {0.5, 1.0, 2.0}) {
    const auto est = core::mc_estimate(n, core::chunk_seed(seed, idx++), [&](core::Rng& rng) { return F.value(x, 0, rng.normal()); });
    res.check("tower/x" + num(x), est.value, est.std_error, F.coeff_at(0, x, 0), 3.0 * est.std_error);
  }

  // f = c with boundary value 0: V_0 = c P(no hit by t)
  const double c = get_double(config, "constant");
  pde::Bvp3Options copt = opt;
  copt.boundary = 0.0;
  const auto FC = pde::bvp3_solve([c](double) { return c; }, g, copt);
  const double c_tol = get_double(config, "constant_tolerance");
  for (double x : {0.5, 1.0, 2.0}) {
    res.check("constant-data/x" + num(x), FC.coeff_at(0, x, 0), 0.0, c * pde::killed_survival(t, x), c_tol);
  }
  return res;
}

ExperimentResult run_hitting(const Json& config) {
  ExperimentResult res{"hitting", {}, {}};
  const auto start = std::chrono::steady_clock::now();
  const auto xs = doubles(config, "xs");
  const auto ts = doubles(config, "ts");
  const std::size_t cells = get_size(config, "cells");
  const std::size_t n = get_size(config, "n");
  const std::uint64_t seed = get_u64(config, "seed");
  const double sigmas = get_double(config, "sigmas");
  if (cells == 0 || cells % 2 != 0) throw ConfigError("cells must be positive and even");
  for (double x : xs) {
    if (!(x > 0.0)) throw ConfigError("xs must be positive");
  }
  const Eigen::MatrixXd Cm = operator_matrix(config["operator"], cells);
  const bool projector = is_projector_on_constant(Cm);
  const bool two_path = is_scalar(Cm, 1.0 / std::sqrt(2.0));
  if (!projector && !two_path) {
    throw ConfigError("route (b) needs operator projector (constant vector) or ou with time ln(2)/2");
  }
  const sq::BoundedOp C(Cm);
  const sq::BoundedOp zero(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(cells)));
  pde::HittingOptions opt;
  opt.cells = cells;
  opt.samples = n;
  opt.widths = doubles(config, "widths");
  opt.h = get_double(config, "h");
  opt.steps = get_size(config, "steps");
  opt.depth = get_int(config, "depth");
  opt.pad = get_double(config, "pad");
  double x_top = 0.0;
  for (double x : xs) x_top = std::max(x_top, x);

  std::uint64_t stream = 0;
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    const double t = ts[ti];
    const double T = 2.0 * t;
    const core::TimeGrid grid(T, cells);
    core::Rng xr(core::chunk_seed(seed, 100 + ti));
    std::vector<double> xi(cells);
    xr.fill_normal(xi);
    double eta = 0.0;
    for (double v : xi) eta += v / std::sqrt(static_cast<double>(cells));
    std::optional<pde::HittingSeries> series;
    if (projector) {
      opt.horizon = T;
      series.emplace(t, x_top + opt.pad * std::sqrt(t), opt);
      res.info("t" + num(t) + "/eta", eta);
    }
    for (double x : xs) {
      const std::string id = "x" + num(x) + "-t" + num(t);
      const auto a = pde::hitting_mc(x, t, C, grid, xi, n, core::chunk_seed(seed, ++stream));
      core::Estimate b;
      if (projector) {
        const auto r = (*series)(x, eta);
        b = {r.value, r.error, 0};
      } else {
        std::vector<double> inc1(cells);
        for (std::size_t c = 0; c < cells; ++c) inc1[c] = -grid.sqrt_dt() * xi[c];
        b = pde::two_path_hitting_mc(std::sqrt(2.0) * x, t, grid, inc1, n, core::chunk_seed(seed, ++stream));
      }
      const double se = core::combined_se(a, b);
      res.info(id + "/route-a", a.value, a.std_error);
      res.info(id + "/route-b", b.value, b.std_error);
      res.check(id + "/agreement", a.value, se, b.value, sigmas * se);
      res.plot.push_back({"route-a-t" + num(t), x, a.value, a.std_error});
      res.plot.push_back({"route-b-t" + num(t), x, b.value, b.std_error});
      const auto u = pde::hitting_mc(x, t, zero, grid, xi, n, core::chunk_seed(seed, ++stream));
      res.check(id + "/unconditional", u.value, u.std_error, pde::first_passage_probability(x, t), sigmas * u.std_error);
    }
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double limit = get_double(config, "time_limit");
  res.assert_row("runtime-within-limit", elapsed <= limit ? 1.0 : 0.0, 0.0, 1.0, 0.0, elapsed <= limit);
  return res;
}

ExperimentResult run_reflected(const Json& config) {
  ExperimentResult res{"reflected", {}, {}};
  const double t = get_double(config, "t");
  const std::size_t cells = get_size(config, "cells");
  const std::size_t n = get_size(config, "n");
  const std::uint64_t seed = get_u64(config, "seed");
  const double sigmas = get_double(config, "sigmas");
  const double x_max = get_double(config, "x_max");
  const std::size_t pts = get_size(config, "fd_points");
  const std::size_t steps = get_size(config, "fd_steps");
  const auto x0s = doubles(config, "x0s");
  if (!(t > 0.0) || cells == 0 || cells % 2 != 0) throw ConfigError("t must be positive and cells positive and even");
  const core::TimeGrid grid(t, cells);
  const auto md = static_cast<Eigen::Index>(cells);
  const sq::BoundedOp zero(Eigen::MatrixXd::Zero(md, md));
  const sq::BoundedOp ident(Eigen::MatrixXd::Identity(md, md));
  const sq::BoundedOp general(operator_matrix(config["operator"], cells));
  const pde::CoefFn f = [](double x) { return std::cos(x); };
  const double bm = get_double(config, "drift_mean");
  const double br = get_double(config, "drift_rate");
  std::vector<std::pair<std::string, pde::Diffusion1d>> models(2);
  models[0].first = "brownian";
  models[1].first = "drift";
  models[1].second.drift = [bm, br](double x) { return bm - br * x; };

  core::Rng xr(core::chunk_seed(seed, 99));
  std::vector<double> xi(cells);
  xr.fill_normal(xi);
  std::uint64_t stream = 0;
  for (const auto& [name, coef] : models) {
    for (double x0 : x0s) {
      const std::string id = name + "/x" + num(x0);
      const double fd = pde::reflected_fd_oracle(f, coef, x0, t, x_max, pts, steps);
      if (name == "brownian") {
        res.check(id + "/fd-vs-closed-form", fd, 0.0, std::cos(x0) * std::exp(-0.5 * t),
                  get_double(config, "closed_form_tolerance"));
      }
      const auto est = pde::reflected_bvp_1d(zero, f, coef, x0, t, grid, xi, n, core::chunk_seed(seed, ++stream));
      const auto diff = paired_difference(cells, grid.dt(), n, core::chunk_seed(seed, ++stream),
                                          [&](std::span<const double> z, double dt) {
                                            return f(pde::reflected_path(x0, coef, dt, z, z.size()));
                                          });
      const double bound = discretization_bound(diff);
      res.info(id + "/discretization-bound", bound, 0.0);
      res.check(id + "/mc-vs-fd", est.value, est.std_error, fd, sigmas * est.std_error + bound);
      // C = I is the pathwise value at xi
      const auto pw = pde::reflected_bvp_1d(ident, f, coef, x0, t, grid, xi, 4, 1);
      res.check(id + "/pathwise-identity", pw.value, pw.std_error,
                f(pde::reflected_path(x0, coef, grid.dt(), xi, cells)), 0.0);
      const auto gen = pde::reflected_bvp_1d(general, f, coef, x0, t, grid, xi, n, core::chunk_seed(seed, ++stream));
      res.info(id + "/configured-operator", gen.value, gen.std_error);
    }
  }
  return res;
}

ExperimentResult run_stopped(const Json& config) {
  ExperimentResult res{"stopped", {}, {}};
  const double H = get_double(config, "horizon");
  const std::size_t cells = get_size(config, "cells");
  const std::size_t n = get_size(config, "n");
  const std::uint64_t seed = get_u64(config, "seed");
  const double sigmas = get_double(config, "sigmas");
  const std::size_t pts = get_size(config, "fd_points");
  const std::size_t steps = get_size(config, "fd_steps");
  const auto x0s = doubles(config, "x0s");
  const auto starts = doubles(config, "t_starts");
  if (!(H > 0.0) || cells == 0 || cells % 2 != 0) throw ConfigError("horizon must be positive and cells positive and even");
  const core::TimeGrid grid(H, cells);
  const auto md = static_cast<Eigen::Index>(cells);
  const sq::BoundedOp zero(Eigen::MatrixXd::Zero(md, md));
  const sq::BoundedOp general(operator_matrix(config["operator"], cells));

  pde::StoppedProblem base;
  base.length = get_double(config, "length");
  base.g0 = get_double(config, "g0");
  base.gL = get_double(config, "gL");
  if (!(base.length > 0.0)) throw ConfigError("length must be positive");
  std::vector<std::pair<std::string, pde::StoppedProblem>> problems(2, {"", base});
  problems[0].first = "harmonic";
  problems[1].first = "running-cost";
  problems[1].second.running = [](double x) { return 1.0 + x * x; };
  const double b = get_double(config, "drift");
  problems[1].second.coef.drift = [b](double) { return b; };

  core::Rng xr(core::chunk_seed(seed, 99));
  std::vector<double> xi(cells);
  xr.fill_normal(xi);
  std::uint64_t stream = 0;
  for (const auto& [name, problem] : problems) {
    const pde::HarmonicExtension gt(problem);
    for (double t : starts) {
      const std::size_t s0 = grid.cells_until(t);
      if (s0 >= cells || s0 % 2 != 0 || std::abs(grid.time(s0) - t) > 1e-12) {
        throw ConfigError("t_starts must be grid times before the horizon on an even cell index");
      }
      for (double x0 : x0s) {
        const std::string id = name + "/t" + num(t) + "/x" + num(x0);
        const double fd = pde::stopped_fd_oracle(problem, x0, t, H, pts, steps);
        if (name == "harmonic") res.check(id + "/fd-vs-harmonic", fd, 0.0, gt(x0), 1e-8);
        const auto est = pde::stopped_bvp_1d(zero, problem, x0, t, grid, xi, n, core::chunk_seed(seed, ++stream));
        const auto diff = paired_difference(cells, grid.dt(), n, core::chunk_seed(seed, ++stream),
                                            [&](std::span<const double> z, double dt) {
                                              const std::size_t k = z.size() == cells ? s0 : s0 / 2;
                                              return pde::stopped_path_value(problem, gt, x0, k, dt, z);
                                            });
        const double bound = discretization_bound(diff);
        res.info(id + "/discretization-bound", bound);
        res.check(id + "/mc-vs-fd", est.value, est.std_error, fd, sigmas * est.std_error + bound);
        const auto gen = pde::stopped_bvp_1d(general, problem, x0, t, grid, xi, n, core::chunk_seed(seed, ++stream));
        res.info(id + "/configured-operator", gen.value, gen.std_error);
      }
      // the boundary is absorbing from the start: values there are the data, for every C
      const auto p0 = pde::stopped_bvp_1d(general, problem, 0.0, t, grid, xi, 16, 1);
      const auto pL = pde::stopped_bvp_1d(general, problem, problem.length, t, grid, xi, 16, 1);
      res.check(name + "/t" + num(t) + "/pin-left", p0.value, p0.std_error, problem.g0, 0.0);
      res.check(name + "/t" + num(t) + "/pin-right", pL.value, pL.std_error, problem.gL, 0.0);
    }
  }
  return res;
}

}  // namespace chaosflow::experiments
