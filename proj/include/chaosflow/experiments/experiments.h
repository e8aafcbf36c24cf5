#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chaosflow/experiments/config.h"
#include "chaosflow/experiments/report.h"

namespace chaosflow::experiments {

// Each runner takes a resolved configuration (see resolve_config).
ExperimentResult run_isometry_suite(const Json& config);
ExperimentResult run_identities(const Json& config);
ExperimentResult run_fbm(const Json& config);
ExperimentResult run_cauchy_series(const Json& config);
ExperimentResult run_bvp3(const Json& config);
ExperimentResult run_hitting(const Json& config);
ExperimentResult run_smoothing(const Json& config);
ExperimentResult run_reflected(const Json& config);
ExperimentResult run_stopped(const Json& config);

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::function<ExperimentResult(const Json&)> run;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo& find_experiment(const std::string& name);  // ConfigError if unknown

// Resolves `user` against the defaults and runs the experiment.
ExperimentResult run_experiment(const std::string& name, const Json& user = Json());

}  // namespace chaosflow::experiments
