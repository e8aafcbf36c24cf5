#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaosflow/core/linalg.h"
#include "chaosflow/core/monte_carlo.h"
#include "chaosflow/experiments/experiments.h"
#include "chaosflow/smoothing/bayes.h"
#include "chaosflow/smoothing/density.h"
#include "chaosflow/smoothing/joint_model.h"
#include "chaosflow/smoothing/spde.h"

namespace chaosflow::experiments {

namespace {

using smoothing::DriftPair;
using smoothing::JointModel;
using smoothing::PairPath;

std::string num(double v) { return format_number(v); }

// Diagonal correlation rho plus a small strictly lower-triangular part, scaled to norm <= 0.8.
Eigen::MatrixXd volterra_v(std::size_t m, std::size_t k, core::Rng& rng) {
  const auto md = static_cast<Eigen::Index>(m);
  const double rho = 0.1 * static_cast<double>(k % 8);
  Eigen::MatrixXd V = rho * Eigen::MatrixXd::Identity(md, md);
  if (k % 2 == 1) {
    for (Eigen::Index i = 1; i < md; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) V(i, j) = 0.3 * rng.normal() / static_cast<double>(md);
    }
  }
  const double nrm = core::operator_norm(V);
  if (nrm > 0.8) V *= 0.8 / nrm;
  return V;
}

DriftPair model_drifts(std::size_t k, double scale, core::Rng& rng) {
  const double c1 = scale * (0.5 + 0.5 * rng.uniform());
  const double c2 = scale * (0.5 + 0.5 * rng.uniform());
  DriftPair d;
  switch (k % 3) {
    case 0:
      d.a1 = [c1](double x) { return c1 * std::sin(x); };
      d.da1 = [c1](double x) { return c1 * std::cos(x); };
      d.a2 = [c2](double x) { return c2 * std::cos(x); };
      d.da2 = [c2](double x) { return -c2 * std::sin(x); };
      break;
    case 1:
      d.a1 = [c1](double x) { return -c1 * x; };
      d.da1 = [c1](double) { return -c1; };
      d.a2 = [c2](double x) { return c2 * x; };
      d.da2 = [c2](double) { return c2; };
      break;
    default:
      d.a1 = [c1](double x) { return c1 * std::tanh(x); };
      d.da1 = [c1](double x) { const double c = std::cosh(x); return c1 / (c * c); };
      d.a2 = [c2](double x) { return c2 * std::atan(x); };
      d.da2 = [c2](double x) { return c2 / (1.0 + x * x); };
      break;
  }
  d.slope_bound = c1 + c2;
  return d;
}

using PathFunctional = std::function<double(std::span<const double>, std::span<const double>)>;

std::vector<std::pair<std::string, PathFunctional>> path_functionals(std::size_t m) {
  const std::size_t half = m / 2;
  return {
      {"end-value", [](std::span<const double> y1, std::span<const double>) { return y1.back(); }},
      {"observation-square", [](std::span<const double>, std::span<const double> y2) { return y2.back() * y2.back(); }},
      {"cross", [half](std::span<const double> y1, std::span<const double> y2) { return std::cos(y1[half]) * y2.back(); }},
      {"running-max", [](std::span<const double> y1, std::span<const double>) { return *std::max_element(y1.begin(), y1.end()); }},
      {"indicator", [](std::span<const double>, std::span<const double> y2) { return y2.back() > 0.0 ? 1.0 : 0.0; }},
  };
}

std::vector<std::pair<std::string, std::function<double(std::span<const double>)>>> observation_tests(std::size_t m) {
  const std::size_t half = m / 2;
  return {
      {"one", [](std::span<const double>) { return 1.0; }},
      {"end-value", [](std::span<const double> u) { return u.back(); }},
      {"cos-mid", [half](std::span<const double> u) { return std::cos(u[half]); }},
      {"square", [](std::span<const double> u) { return u.back() * u.back(); }},
      {"gaussian", [](std::span<const double> u) { return std::exp(-u.back() * u.back()); }},
  };
}

}  // namespace

ExperimentResult run_smoothing(const Json& config) {
  ExperimentResult res{"smoothing", {}, {}};
  const std::size_t m = get_size(config, "cells");
  const std::size_t models = get_size(config, "models");
  const std::size_t n = get_size(config, "n");
  const std::uint64_t seed = get_u64(config, "seed");
  const double scale = get_double(config, "drift_scale");
  const double sigmas = get_double(config, "sigmas");
  const int n_max = get_int(config, "nilpotence_order");
  if (m < 2 || models == 0 || n_max < 1) throw ConfigError("cells >= 2, models >= 1 and nilpotence_order >= 1 required");
  const core::TimeGrid grid(1.0, m);
  core::Rng rng(core::chunk_seed(seed, 1));
  std::vector<JointModel> joint;
  std::vector<DriftPair> drifts;
  for (std::size_t k = 0; k < models; ++k) {
    joint.push_back(smoothing::build_joint(volterra_v(m, k, rng), grid));
    drifts.push_back(model_drifts(k, scale, rng));
  }
  std::uint64_t stream = 10;

  for (std::size_t k = 0; k < models; ++k) {
    const auto& M = joint[k];
    const auto& d = drifts[k];
    const std::string id = "model-" + std::to_string(k);
    const auto ep = core::mc_estimate(n, core::chunk_seed(seed, ++stream), [&](core::Rng& r) {
      const Eigen::VectorXd xi = smoothing::sample_noise(M, r);
      return smoothing::density_p(M, d, std::span<const double>(xi.data(), 2 * m));
    });
    res.check(id + "/mean-density", ep.value, ep.std_error, 1.0, sigmas * ep.std_error);

    const auto vc = smoothing::volterra_check(M);
    res.assert_row(id + "/volterra", vc.violation, 0.0, 0.0, 1e-12, vc.holds);
    core::Rng pr(core::chunk_seed(seed, ++stream));
    const PairPath path = smoothing::sample_pair(M, d, pr);
    const auto q = smoothing::quasi_nilpotence(M, d, path.w1, n_max);
    const auto env = smoothing::nilpotence_envelope(M, d, n_max);
    double worst = 0.0;
    for (int i = 0; i < n_max; ++i) worst = std::max(worst, q[static_cast<std::size_t>(i)] / env[static_cast<std::size_t>(i)]);
    res.assert_row(id + "/quasi-nilpotence-within-envelope", worst, 0.0, 1.0, 1e-12, worst <= 1.0 + 1e-12);
    res.info(id + "/root-norm-at-order-" + std::to_string(n_max), q.back(), 0.0, env.back());
    res.info(id + "/contraction-step", smoothing::contraction_estimate(M, d));
  }

  // a non-causal V: reported, and the density refuses it
  {
    const auto md = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(md, md);
    for (Eigen::Index i = 0; i + 1 < md; ++i) V(i, i + 1) = 0.4;
    const auto M = smoothing::build_joint(V, grid);
    const auto vc = smoothing::volterra_check(M);
    res.info("non-volterra/violation", vc.violation);
    bool refused = false;
    try {
      const Eigen::VectorXd xi = Eigen::VectorXd::Zero(2 * md);
      smoothing::density_p(M, drifts[0], std::span<const double>(xi.data(), 2 * m));
    } catch (const std::domain_error&) {
      refused = true;
    }
    res.assert_row("non-volterra/flagged-and-refused", (!vc.holds && refused) ? 1.0 : 0.0, 0.0, 1.0, 0.0,
                   !vc.holds && refused);
  }

  // change of measure: E F(x1, x2) = E F(w1, w2) p
  const auto funcs = path_functionals(m);
  for (std::size_t k : {std::size_t{1}, models / 2}) {
    if (k >= models) continue;
    const auto& M = joint[k];
    const auto& d = drifts[k];
    const auto lhs = core::mc_estimate(n, core::chunk_seed(seed, ++stream), funcs.size(), [&](core::Rng& r, std::span<double> out) {
      const PairPath p = smoothing::sample_pair(M, d, r);
      for (std::size_t f = 0; f < funcs.size(); ++f) out[f] = funcs[f].second(p.x1, p.x2);
    });
    const auto rhs = core::mc_estimate(n, core::chunk_seed(seed, ++stream), funcs.size(), [&](core::Rng& r, std::span<double> out) {
      const Eigen::VectorXd xi = smoothing::sample_noise(M, r);
      const std::span<const double> xs(xi.data(), 2 * m);
      const PairPath p = smoothing::path_from_noise(M, d, xs);
      const double w = smoothing::density_p(M, d, xs);
      for (std::size_t f = 0; f < funcs.size(); ++f) out[f] = funcs[f].second(p.w1, p.w2) * w;
    });
    for (std::size_t f = 0; f < funcs.size(); ++f) {
      const double se = core::combined_se(lhs[f], rhs[f]);
      res.check("change-of-measure/model-" + std::to_string(k) + "/" + funcs[f].first, lhs[f].value, se, rhs[f].value,
                sigmas * se);
    }
  }

  // Bayes pairing: E gamma(x2) psi(x2) = E gamma(x2) f(x1(1)), psi the smoothed estimate of f(x1(1))
  {
    const std::size_t k = std::min<std::size_t>(1, models - 1);
    const auto& M = joint[k];
    const auto& d = drifts[k];
    const auto tests = observation_tests(m);
    const auto f = [](double x) { return std::sin(x) + 0.5 * x; };
    const std::size_t outer = get_size(config, "bayes_outer");
    const std::size_t inner = get_size(config, "bayes_inner");
    if (outer < 2 || inner < 2) throw ConfigError("bayes_outer and bayes_inner must be at least 2");
    core::Rng orng(core::chunk_seed(seed, ++stream));
    std::vector<std::vector<double>> vals(tests.size());
    double min_ess = static_cast<double>(inner);
    for (std::size_t i = 0; i < outer; ++i) {
      const PairPath p = smoothing::sample_pair(M, d, orng);
      const auto psi = smoothing::bayes_psi(M, d, f, 1.0, p.x2, inner, core::chunk_seed(seed, 100000 + i));
      min_ess = std::min(min_ess, psi.ess);
      for (std::size_t g = 0; g < tests.size(); ++g) vals[g].push_back(tests[g].second(p.x2) * psi.value);
    }
    res.info("bayes/min-effective-sample-size", min_ess, 0.0, static_cast<double>(inner));
    const auto rhs = core::mc_estimate(n, core::chunk_seed(seed, ++stream), tests.size(), [&](core::Rng& r, std::span<double> out) {
      const PairPath p = smoothing::sample_pair(M, d, r);
      for (std::size_t g = 0; g < tests.size(); ++g) out[g] = tests[g].second(p.x2) * f(p.x1.back());
    });
    for (std::size_t g = 0; g < tests.size(); ++g) {
      const auto& v = vals[g];
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var /= static_cast<double>(v.size() - 1);
      const core::Estimate lhs{mean, std::sqrt(var / static_cast<double>(v.size())), v.size()};
      const double se = core::combined_se(lhs, rhs[g]);
      res.check("bayes/" + tests[g].first, lhs.value, se, rhs[g].value, sigmas * se);
    }
  }

  // filtering equation with a2 = 0
  {
    std::vector<double> rs;
    for (const auto& v : config["spde_rs"]) {
      if (!v.is_number()) throw ConfigError("key 'spde_rs' must list numbers");
      rs.push_back(v.get<double>());
    }
    const std::size_t sn = get_size(config, "spde_n");
    const smoothing::TestFunction tf{[](double x) { return std::exp(-x * x); },
                                     [](double x) { return -2.0 * x * std::exp(-x * x); },
                                     [](double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); }};
    const auto md = static_cast<Eigen::Index>(m);
    struct Case {
      std::string name;
      Eigen::MatrixXd V;
      DriftPair d;
      bool constant;
    };
    std::vector<Case> cases(3);
    cases[0] = {"constant-drift", 0.5 * Eigen::MatrixXd::Identity(md, md), {}, true};
    cases[0].d.a1 = [](double) { return 0.7; };
    cases[1] = {"sine-drift", 0.5 * Eigen::MatrixXd::Identity(md, md), {}, false};
    cases[2] = {"sine-drift-lagged", 0.5 * Eigen::MatrixXd::Identity(md, md), {}, false};
    for (Eigen::Index i = 1; i < md; ++i) cases[2].V(i, i - 1) = 0.2;
    for (std::size_t c = 1; c < 3; ++c) {
      cases[c].d.a1 = [](double x) { return 0.8 * std::sin(x); };
      cases[c].d.da1 = [](double x) { return 0.8 * std::cos(x); };
    }
    for (auto& c : cases) c.d.slope_bound = 0.8;
    for (const auto& c : cases) {
      const auto M = smoothing::build_joint(c.V, grid);
      core::Rng xr(core::chunk_seed(seed, ++stream));
      std::vector<double> xi2(m);
      xr.fill_normal(xi2);
      const auto rows = smoothing::filtering_residual(M, c.d, tf, rs, 1.0, xi2, sn, core::chunk_seed(seed, ++stream));
      for (const auto& r : rows) {
        const std::string id = "filtering/" + c.name + "/r" + num(r.r);
        const bool ok = std::abs(r.residual) <= r.error_bar && std::abs(r.corrected) <= 3.0 * r.corrected_se;
        res.assert_row(id + "/residual", r.residual, r.residual_se, 0.0, r.error_bar, ok);
        res.info(id + "/discretization", r.discretization);
        res.info(id + "/corrected", r.corrected, r.corrected_se);
        const double red_bar = 3.0 * r.reduced_se + std::abs(r.discretization);
        if (c.constant) {
          res.check(id + "/reduced-form", r.reduced, r.reduced_se, 0.0, red_bar);
        } else {
          res.info(id + "/reduced-form", r.reduced, r.reduced_se);
        }
      }
    }
  }
  return res;
}

}  // namespace chaosflow::experiments
