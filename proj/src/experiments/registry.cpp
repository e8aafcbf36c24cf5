#include <algorithm>

#include "chaosflow/experiments/experiments.h"

namespace chaosflow::experiments {

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry = {
      {"isometry-suite", "moment2 vs Gauss-Hermite expectation of the square", run_isometry_suite},
      {"identities", "duality, Wick, Monte Carlo second quantization, intertwining, integrator bound, Skorokhod product rules",
       run_identities},
      {"fbm", "fractional Brownian motion covariance and variance", run_fbm},
      {"cauchy-series", "linear SDE series vs matrix form and weak PDE residual order", run_cauchy_series},
      {"bvp3", "Hermite-series boundary problem: terminal data, residual order, kernel checks", run_bvp3},
      {"hitting", "conditional hitting probability by Monte Carlo and by the series solver", run_hitting},
      {"smoothing", "densities, change of measure, Bayes pairing, Volterra checks, filtering residual",
       run_smoothing},
      {"reflected", "reflected 1-D diffusion vs finite-difference oracle", run_reflected},
      {"stopped", "stopped 1-D diffusion vs finite-difference oracle and boundary pins", run_stopped},
  };
  return registry;
}

const ExperimentInfo& find_experiment(const std::string& name) {
  const auto& reg = experiment_registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const ExperimentInfo& e) { return e.name == name; });
  if (it == reg.end()) throw ConfigError("unknown experiment '" + name + "'");
  return *it;
}

ExperimentResult run_experiment(const std::string& name, const Json& user) {
  const ExperimentInfo& info = find_experiment(name);
  return info.run(resolve_config(name, user));
}

}  // namespace chaosflow::experiments
