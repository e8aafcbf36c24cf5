#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "chaosflow/experiments/config.h"

namespace chaosflow::experiments {

// One CSV line. Informational rows carry no assertion and print "info" in the pass column.
struct ResultRow {
  std::string experiment;
  std::string case_id;
  double estimate = 0.0;
  double std_error = 0.0;
  double oracle = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool informational = false;
};

struct PlotPoint {
  std::string series;
  double x = 0.0;
  double y = 0.0;
  double error = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<ResultRow> rows;
  std::vector<PlotPoint> plot;
  bool passed() const;
  std::size_t failures() const;
  // Appends an asserted row with pass = |estimate - oracle| <= tolerance.
  ResultRow& check(const std::string& case_id, double estimate, double std_error, double oracle, double tolerance);
  // Appends an asserted row whose pass flag is decided by the caller.
  ResultRow& assert_row(const std::string& case_id, double estimate, double std_error, double oracle,
                        double tolerance, bool pass);
  ResultRow& info(const std::string& case_id, double estimate, double std_error = 0.0, double oracle = 0.0);
};

// Shortest round-trip decimal text, '.' separator regardless of locale; nan/inf spelled out.
std::string format_number(double v);

inline constexpr const char* kCsvHeader = "experiment,case_id,estimate,std_error,oracle,tolerance,pass";

void write_csv(std::ostream& out, const ExperimentResult& result);
void write_plot_csv(std::ostream& out, const ExperimentResult& result);
Json metadata(const ExperimentResult& result, const Json& resolved_config);

}  // namespace chaosflow::experiments
