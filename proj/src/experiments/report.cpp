#include "chaosflow/experiments/report.h"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <charconv>
#include <cmath>


namespace chaosflow::experiments {

bool ExperimentResult::passed() const { return failures() == 0; }

std::size_t ExperimentResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return !r.informational && !r.pass; }));
}

ResultRow& ExperimentResult::check(const std::string& case_id, double estimate, double std_error, double oracle,
                                   double tolerance) {
  const double diff = std::abs(estimate - oracle);
  return assert_row(case_id, estimate, std_error, oracle, tolerance, std::isfinite(diff) && diff <= tolerance);
}

ResultRow& ExperimentResult::assert_row(const std::string& case_id, double estimate, double std_error, double oracle,
                                        double tolerance, bool pass) {
  rows.push_back({experiment, case_id, estimate, std_error, oracle, tolerance, pass, false});
  return rows.back();
}

ResultRow& ExperimentResult::info(const std::string& case_id, double estimate, double std_error, double oracle) {
  rows.push_back({experiment, case_id, estimate, std_error, oracle, std::nan(""), true, true});
  return rows.back();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// Case ids are generated internally; quote them only if they contain a separator.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& out, const ExperimentResult& result) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : result.rows) {
    out << csv_field(r.experiment) << ',' << csv_field(r.case_id) << ',' << format_number(r.estimate) << ','
        << format_number(r.std_error) << ',' << format_number(r.oracle) << ',' << format_number(r.tolerance) << ','
        << (r.informational ? "info" : (r.pass ? "true" : "false")) << '\n';
  }
}

void write_plot_csv(std::ostream& out, const ExperimentResult& result) {
  out << "series,x,y,error\n";
  for (const PlotPoint& p : result.plot) {
    out << csv_field(p.series) << ',' << format_number(p.x) << ',' << format_number(p.y) << ','
        << format_number(p.error) << '\n';
  }
}

Json metadata(const ExperimentResult& result, const Json& resolved_config) {
  std::size_t informational = 0;
  for (const ResultRow& r : result.rows) informational += r.informational ? 1 : 0;
  Json versions = {{"chaosflow", "1.0.0"},
                   {"compiler", __VERSION__},
                   {"cxx_standard", static_cast<long>(__cplusplus)},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) +
                                 "." + std::to_string(BOOST_VERSION % 100)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  return {{"experiment", result.experiment},
          {"config_hash", config_hash(resolved_config)},
          {"seed", resolved_config.value("seed", 0ull)},
          {"versions", versions},
          {"rows", result.rows.size()},
          {"informational_rows", informational},
          {"failures", result.failures()},
          {"passed", result.passed()},
          {"columns", {"experiment", "case_id", "estimate", "std_error", "oracle", "tolerance", "pass"}},
          {"config", resolved_config}};
}

}  // namespace chaosflow::experiments
