#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "chaosflow/experiments/config.h"
#include "chaosflow/experiments/experiments.h"
#include "chaosflow/experiments/report.h"
#include "doctest.h"

using namespace chaosflow::experiments;

TEST_CASE("every registered experiment has defaults naming itself") {
  const auto& reg = experiment_registry();
  CHECK(reg.size() == 9);
  for (const auto& e : reg) {
    const Json d = default_config(e.name);
    CHECK(d.at("experiment") == e.name);
    CHECK(d.contains("seed"));
    CHECK(d.contains("n"));
    CHECK(resolve_config(e.name, Json::object()) == d);
  }
  CHECK_THROWS_AS(find_experiment("no-such-experiment"), ConfigError);
}

TEST_CASE("config resolution rejects unknown keys and wrong types") {
  CHECK_THROWS_AS(resolve_config("fbm", Json{{"quadrature_order", 3}}), ConfigError);
  CHECK_THROWS_AS(resolve_config("fbm", Json{{"alpha", "high"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config("fbm", Json{{"experiment", "hitting"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config("fbm", Json{{"seed", -4}}), ConfigError);
  CHECK_THROWS_AS(resolve_config("fbm", Json::array()), ConfigError);
  // integers are accepted where numbers are expected
  const Json r = resolve_config("fbm", Json{{"alpha", 1}, {"n", 500}});
  CHECK(get_double(r, "alpha") == 1.0);
  CHECK(get_size(r, "n") == 500);
  // arrays replace the default wholesale
  const Json h = resolve_config("hitting", Json{{"xs", {0.25}}});
  CHECK(h.at("xs").size() == 1);
  // the operator object is replaced, not merged
  const Json o = resolve_config("hitting", Json{{"operator", {{"kind", "ou"}, {"time", 0.3}}}});
  CHECK(o.at("operator").at("kind") == "ou");
  CHECK_THROWS_AS(get_size(Json{{"k", -1}}, "k"), ConfigError);
  CHECK_THROWS_AS(get_double(Json::object(), "missing"), ConfigError);
}

TEST_CASE("config files") {
  const std::string good = "test_cli_good.json";
  std::ofstream(good) << R"({"experiment": "fbm", "seed": 9})";
  CHECK(load_config_file(good).at("seed") == 9);
  const std::string bad = "test_cli_bad.json";
  std::ofstream(bad) << R"({"seed": )";
  CHECK_THROWS_AS(load_config_file(bad), ConfigError);
  CHECK_THROWS_AS(load_config_file("does/not/exist.json"), ConfigError);
  std::remove(good.c_str());
  std::remove(bad.c_str());
}

TEST_CASE("operator specs") {
  const std::size_t m = 4;
  CHECK(operator_matrix(Json{{"kind", "identity"}}, m).isIdentity());
  CHECK(operator_matrix(Json{{"kind", "scalar"}, {"value", 0.6}}, m)(2, 2) == doctest::Approx(0.6));
  CHECK(operator_matrix(Json{{"kind", "ou"}, {"time", 0.5}}, m)(1, 1) == doctest::Approx(std::exp(-0.5)));
  const auto P = operator_matrix(Json{{"kind", "projector"}}, m);
  CHECK(P(0, 3) == doctest::Approx(0.25));
  CHECK((P * P - P).norm() < 1e-14);
  const auto Pv = operator_matrix(Json{{"kind", "projector"}, {"vector", {3.0, 0.0, 4.0, 0.0}}}, m);
  CHECK(Pv(0, 2) == doctest::Approx(0.48));
  const Json cm{{"kind", "custom-matrix"},
                {"matrix", {{0.5, 0.0, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.0}, {0.1, 0.0, 0.0, 0.5}}}};
  CHECK(operator_matrix(cm, m)(3, 0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(operator_matrix(Json{{"kind", "rotation"}}, m), ConfigError);
  CHECK_THROWS_AS(operator_matrix(Json{{"kind", "scalar"}, {"value", 1.5}}, m), ConfigError);
  CHECK_THROWS_AS(operator_matrix(Json{{"kind", "custom-matrix"}, {"matrix", {{1.0}}}}, m), ConfigError);
  CHECK_THROWS_AS(operator_matrix(Json{{"kind", "scalar"}, {"value", 0.5}, {"colour", 1}}, m), ConfigError);
}

TEST_CASE("numbers and csv layout") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.0) == "-2");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_number(third)) == third);

  ExperimentResult r;
  r.experiment = "demo";
  r.check("a", 1.0, 0.1, 1.05, 0.1);
  r.check("b", 1.0, 0.1, 2.0, 0.1);
  r.info("c", 3.5);
  CHECK(r.failures() == 1);
  CHECK_FALSE(r.passed());
  std::ostringstream os;
  write_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == kCsvHeader);
  std::getline(is, line);
  CHECK(line == "demo,a,1,0.1,1.05,0.1,true");
  std::getline(is, line);
  CHECK(line.substr(line.size() - 5) == "false");
  std::getline(is, line);
  CHECK(line.substr(line.size() - 4) == "info");
}

TEST_CASE("config hash and metadata") {
  const Json a = default_config("fbm");
  CHECK(config_hash(a) == config_hash(default_config("fbm")));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(resolve_config("fbm", Json{{"seed", 304}})));
  ExperimentResult r;
  r.experiment = "fbm";
  const Json md = metadata(r, a);
  CHECK(md.at("config_hash") == config_hash(a));
  CHECK(md.at("seed") == 303);
  CHECK(md.contains("versions"));
}

TEST_CASE("runs are deterministic and independent of the worker count") {
  const Json user{{"n", 3000}};
  setenv("CHAOSFLOW_THREADS", "1", 1);
  const auto r1 = run_experiment("fbm", user);
  setenv("CHAOSFLOW_THREADS", "3", 1);
  const auto r3 = run_experiment("fbm", user);
  unsetenv("CHAOSFLOW_THREADS");
  std::ostringstream a, b;
  write_csv(a, r1);
  write_csv(b, r3);
  CHECK(a.str() == b.str());
  const auto iso = run_experiment("isometry-suite", Json{{"n", 5}});
  CHECK(iso.passed());
  CHECK_THROWS_AS(run_experiment("fbm", Json{{"alpha", 0.3}}), std::exception);
}
