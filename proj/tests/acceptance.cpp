// Acceptance runner: one PASS/FAIL line per criterion, each backed by a named experiment.
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chaosflow/experiments/experiments.h"

using namespace chaosflow::experiments;

namespace {

struct Tally {
  std::size_t asserted = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;
};

void add(Tally& t, const ExperimentResult& r, const std::function<bool(const std::string&)>& select) {
  for (const auto& row : r.rows) {
    if (row.informational || !select(row.case_id)) continue;
    ++t.asserted;
    if (!row.pass) {
      ++t.failed;
      if (t.failures.size() < 5) t.failures.push_back(r.experiment + ":" + row.case_id);
    }
  }
}

auto prefix(const std::string& p) {
  return [p](const std::string& id) { return id.rfind(p, 0) == 0; };
}

bool all(const std::string&) { return true; }

}  // namespace

int main() {
  std::map<std::string, ExperimentResult> results;
  std::map<std::string, double> seconds;
  for (const char* name :
       {"isometry-suite", "identities", "fbm", "cauchy-series", "bvp3", "hitting", "smoothing", "reflected", "stopped"}) {
    const auto t0 = std::chrono::steady_clock::now();
    results[name] = run_experiment(name);
    seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[ran %s: %zu rows in %.1f s]\n", name, results[name].rows.size(), seconds[name]);
    std::fflush(stdout);
  }

  struct Criterion {
    int id;
    std::string title;
    std::vector<std::pair<std::string, std::function<bool(const std::string&)>>> parts;
  };
  const std::vector<Criterion> criteria = {
      {1, "isometry suite", {{"isometry-suite", all}}},
      {2, "duality suite", {{"identities", prefix("duality/")}}},
      {3, "second quantization (Wick identity, Monte Carlo vs chaos)",
       {{"identities", prefix("wick/")}, {"identities", prefix("gamma-mc/")}}},
      {4, "intertwining", {{"identities", prefix("intertwining/")}}},
      {5, "integrator bound", {{"identities", prefix("integrator/")}}},
      {6, "fBm covariance and variance", {{"fbm", all}}},
      {7, "series solution and weak residual order", {{"cauchy-series", all}}},
      {8, "Hermite-series boundary solver", {{"bvp3", all}}},
      {9, "conditional hitting probability end to end", {{"hitting", all}}},
      {10, "smoothing", {{"smoothing", all}, {"identities", prefix("skorokhod/")}}},
      {11, "reflected and stopped 1-D problems", {{"reflected", all}, {"stopped", all}}},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Tally t;
    double secs = 0.0;
    for (const auto& [exp, sel] : c.parts) {
      add(t, results.at(exp), sel);
      secs += seconds.at(exp);
    }
    const bool ok = t.asserted > 0 && t.failed == 0;
    failed += ok ? 0 : 1;
    std::printf("criterion %2d %s: %s (%zu/%zu checks, %.1f s)", c.id, c.title.c_str(), ok ? "PASS" : "FAIL",
                t.asserted - t.failed, t.asserted, secs);
    for (const auto& f : t.failures) std::printf(" [%s]", f.c_str());
    std::printf("\n");
  }
  return failed == 0 ? 0 : 1;
}
