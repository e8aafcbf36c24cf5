#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "chaosflow/experiments/experiments.h"

namespace fs = std::filesystem;
using namespace chaosflow::experiments;

namespace {

constexpr int kExitTolerance = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run(const std::string& name, const std::string& config_path, std::optional<std::uint64_t> seed,
        std::optional<std::uint64_t> n, const std::string& out_dir) {
  find_experiment(name);
  Json user = config_path.empty() ? Json::object() : load_config_file(config_path);
  if (!user.is_object()) throw ConfigError("configuration must be a JSON object");
  if (seed) user["seed"] = *seed;
  if (n) user["n"] = *n;
  const Json resolved = resolve_config(name, user);
  const ExperimentResult result = find_experiment(name).run(resolved);

  fs::create_directories(out_dir);
  std::ostringstream csv, plot;
  csv.imbue(std::locale::classic());
  write_csv(csv, result);
  write_file(fs::path(out_dir) / (name + ".csv"), csv.str());
  write_file(fs::path(out_dir) / (name + ".json"), metadata(result, resolved).dump(2) + "\n");
  if (!result.plot.empty()) {
    write_plot_csv(plot, result);
    write_file(fs::path(out_dir) / (name + "_plot.csv"), plot.str());
  }
  std::cout << name << ": " << result.rows.size() << " rows, " << result.failures() << " failures -> "
            << (fs::path(out_dir) / (name + ".csv")).string() << "\n";
  for (const auto& r : result.rows) {
    if (!r.informational && !r.pass) {
      std::cout << "  FAIL " << r.case_id << ": estimate " << format_number(r.estimate) << ", oracle "
                << format_number(r.oracle) << ", tolerance " << format_number(r.tolerance) << "\n";
    }
  }
  return result.passed() ? 0 : kExitTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaosflow experiment runner"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a named experiment");
  std::string name, config_path, out_dir = "chaosflow_out";
  std::uint64_t seed = 0, n = 0;
  run_cmd->add_option("experiment", name, "experiment name (see 'list')")->required();
  run_cmd->add_option("--config", config_path, "JSON configuration file");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the seed");
  auto* n_opt = run_cmd->add_option("--n", n, "override the sample or case count");
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* list_cmd = app.add_subcommand("list", "list experiments");
  auto* defaults_cmd = app.add_subcommand("defaults", "print the default configuration of an experiment");
  std::string defaults_name;
  defaults_cmd->add_option("experiment", defaults_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& e : experiment_registry()) std::cout << e.name << "\t" << e.description << "\n";
      return 0;
    }
    if (defaults_cmd->parsed()) {
      std::cout << default_config(defaults_name).dump(2) << "\n";
      return 0;
    }
    std::optional<std::uint64_t> s, k;
    if (seed_opt->count() > 0) s = seed;
    if (n_opt->count() > 0) k = n;
    return run(name, config_path, s, k, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: invalid value: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
