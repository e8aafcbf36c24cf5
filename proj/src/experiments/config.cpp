#include "chaosflow/experiments/config.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chaosflow/core/linalg.h"

namespace chaosflow::experiments {

namespace {

Json isometry_defaults() {
  return {{"seed", 101},     {"n", 100},          {"max_dim", 4},
          {"max_order", 4},  {"quad_order", 6},   {"tolerance", 1e-8},
          {"time_limit", 60.0}};
}

Json identities_defaults() {
  return {{"seed", 202},
          {"n", 100000},
          {"cases", 100},
          {"suites", {"duality", "wick", "gamma-mc", "intertwining", "integrator", "skorokhod"}},
          {"max_dim", 4},
          {"tolerance", 1e-10},
          {"gamma_mc_trials", 100},
          {"gamma_mc_min_pass", 99},
          {"gamma_mc_dim", 3},
          {"gamma_mc_order", 3},
          {"integrator_cells", 16},
          {"integrator_trials", 200},
          {"integrator_tolerance", 1e-9},
          {"operators",
           {{{"kind", "identity"}},
            {{"kind", "scalar"}, {"value", 0.6}},
            {{"kind", "projector"}},
            {{"kind", "ou"}, {"time", 0.5}}}}};
}

Json fbm_defaults() {
  return {{"seed", 303},       {"n", 100000},       {"alpha", 0.7},          {"cells", 16},
          {"horizon", 1.0},    {"refine", 64},      {"quad_order", 16},      {"sigmas", 3.0},
          {"variance_tolerance", 0.02}, {"limit_alpha", 0.51}};
}

Json cauchy_defaults() {
  return {{"seed", 404},
          {"n", 50},
          {"max_cells", 6},
          {"max_order", 3},
          {"tolerance", 1e-10},
          {"weak_levels", {8, 16, 32}},
          {"weak_h", 0.1},
          {"weak_xs", {-1.0, -0.5, 0.0, 0.5, 1.0}},
          {"horizon", 1.0},
          {"min_order", 1.0}};
}

Json bvp3_defaults() {
  return {{"seed", 505},
          {"n", 100000},
          {"t", 1.0},
          {"horizon", 0.0},
          {"depth", 20},
          {"h_levels", {0.04, 0.02, 0.01}},
          {"ds_over_h", 2.0},
          {"pad", 7.0},
          {"x_hi", 3.0},
          {"etas", {-1.0, 0.0, 0.5, 1.0}},
          {"width", 1.0},
          {"min_order", 1.0},
          {"ck_tolerance", 1e-6},
          {"closed_form_tolerance", 1e-4},
          {"constant", 0.7},
          {"constant_tolerance", 1e-3}};
}

Json hitting_defaults() {
  return {{"seed", 606},
          {"n", 100000},
          {"xs", {0.5, 1.0, 2.0}},
          {"ts", {0.5, 1.0}},
          {"cells", 64},
          {"operator", {{"kind", "projector"}}},
          {"widths", {0.2, 0.1}},
          {"h", 0.01},
          {"steps", 100},
          {"depth", 30},
          {"pad", 7.0},
          {"sigmas", 3.0},
          {"time_limit", 600.0}};
}

Json smoothing_defaults() {
  return {{"seed", 707},
          {"n", 100000},
          {"cells", 16},
          {"models", 10},
          {"drift_scale", 0.5},
          {"sigmas", 3.0},
          {"bayes_outer", 400},
          {"bayes_inner", 2000},
          {"nilpotence_order", 8},
          {"spde_n", 200000},
          {"spde_rs", {-1.0, -0.3, 0.4, 1.2}}};
}

Json reflected_defaults() {
  return {{"seed", 808},
          {"n", 100000},
          {"t", 1.0},
          {"cells", 64},
          {"x0s", {0.3, 1.0, 2.0}},
          {"drift_mean", 0.5},
          {"drift_rate", 0.3},
          {"x_max", 4.0 * std::acos(-1.0)},
          {"fd_points", 2001},
          {"fd_steps", 2000},
          {"closed_form_tolerance", 1e-5},
          {"sigmas", 3.0},
          {"operator", {{"kind", "ou"}, {"time", 0.5}}}};
}

Json stopped_defaults() {
  return {{"seed", 909},
          {"n", 100000},
          {"horizon", 1.0},
          {"cells", 64},
          {"length", 1.0},
          {"g0", 0.0},
          {"gL", 1.0},
          {"x0s", {0.25, 0.5, 0.8}},
          {"t_starts", {0.0, 0.5}},
          {"drift", 0.3},
          {"fd_points", 401},
          {"fd_steps", 4000},
          {"sigmas", 3.0},
          {"operator", {{"kind", "ou"}, {"time", 0.5}}}};
}

bool compatible(const Json& def, const Json& val) {
  if (def.is_number()) return val.is_number();
  if (def.is_string()) return val.is_string();
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return true;
}

const char* type_name(const Json& j) {
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_boolean()) return "boolean";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

// Operator specs are free-form objects validated by operator_matrix.
bool is_operator_key(const std::string& key) { return key == "operator" || key == "operators"; }

void merge(Json& target, const Json& user, const std::string& path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!target.contains(it.key())) throw ConfigError("unknown key '" + key + "'");
    Json& slot = target[it.key()];
    if (!compatible(slot, it.value())) {
      throw ConfigError("key '" + key + "' must be a " + type_name(slot) + ", got " + type_name(it.value()));
    }
    if (slot.is_object() && !is_operator_key(it.key())) {
      merge(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

}  // namespace

Json default_config(const std::string& experiment) {
  Json body;
  if (experiment == "isometry-suite") body = isometry_defaults();
  else if (experiment == "identities") body = identities_defaults();
  else if (experiment == "fbm") body = fbm_defaults();
  else if (experiment == "cauchy-series") body = cauchy_defaults();
  else if (experiment == "bvp3") body = bvp3_defaults();
  else if (experiment == "hitting") body = hitting_defaults();
  else if (experiment == "smoothing") body = smoothing_defaults();
  else if (experiment == "reflected") body = reflected_defaults();
  else if (experiment == "stopped") body = stopped_defaults();
  else throw ConfigError("unknown experiment '" + experiment + "'");
  Json out = {{"experiment", experiment}};
  out.update(body);
  return out;
}

Json resolve_config(const std::string& experiment, const Json& user) {
  Json resolved = default_config(experiment);
  if (user.is_null()) return resolved;
  if (!user.is_object()) throw ConfigError("configuration must be a JSON object");
  if (user.contains("experiment")) {
    if (!user["experiment"].is_string() || user["experiment"].get<std::string>() != experiment) {
      throw ConfigError("key 'experiment' does not match the requested experiment '" + experiment + "'");
    }
  }
  merge(resolved, user, "");
  get_u64(resolved, "seed");
  get_u64(resolved, "n");
  return resolved;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON in '") + path + "': " + e.what());
  }
}

std::string config_hash(const Json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double get_double(const Json& config, const std::string& key) {
  if (!config.contains(key) || !config[key].is_number()) throw ConfigError("key '" + key + "' must be a number");
  const double v = config[key].get<double>();
  if (!std::isfinite(v)) throw ConfigError("key '" + key + "' must be finite");
  return v;
}

std::uint64_t get_u64(const Json& config, const std::string& key) {
  if (!config.contains(key) || !config[key].is_number_integer() ||
      (!config[key].is_number_unsigned() && config[key].get<long long>() < 0)) {
    throw ConfigError("key '" + key + "' must be a non-negative integer");
  }
  return config[key].get<std::uint64_t>();
}

std::size_t get_size(const Json& config, const std::string& key) { return static_cast<std::size_t>(get_u64(config, key)); }

int get_int(const Json& config, const std::string& key) {
  if (!config.contains(key) || !config[key].is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
  return config[key].get<int>();
}

Eigen::MatrixXd operator_matrix(const Json& spec, std::size_t m) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
    throw ConfigError("operator spec needs a string 'kind'");
  }
  for (auto it = spec.begin(); it != spec.end(); ++it) {
    const std::string& k = it.key();
    if (k != "kind" && k != "value" && k != "time" && k != "vector" && k != "matrix") {
      throw ConfigError("unknown operator key '" + k + "'");
    }
  }
  const std::string kind = spec["kind"].get<std::string>();
  const auto md = static_cast<Eigen::Index>(m);
  if (kind == "identity") return Eigen::MatrixXd::Identity(md, md);
  if (kind == "scalar") {
    const double c = get_double(spec, "value");
    if (std::abs(c) > 1.0) throw ConfigError("scalar operator needs |value| <= 1");
    return c * Eigen::MatrixXd::Identity(md, md);
  }
  if (kind == "ou") {
    const double t = get_double(spec, "time");
    if (t < 0.0) throw ConfigError("ou operator needs time >= 0");
    return std::exp(-t) * Eigen::MatrixXd::Identity(md, md);
  }
  if (kind == "projector") {
    Eigen::VectorXd e = Eigen::VectorXd::Constant(md, 1.0);
    if (spec.contains("vector")) {
      const Json& v = spec["vector"];
      if (!v.is_array() || v.size() != m) throw ConfigError("projector 'vector' must have " + std::to_string(m) + " entries");
      for (std::size_t i = 0; i < m; ++i) {
        if (!v[i].is_number()) throw ConfigError("projector 'vector' entries must be numbers");
        e(static_cast<Eigen::Index>(i)) = v[i].get<double>();
      }
    }
    const double nrm = e.norm();
    if (nrm == 0.0) throw ConfigError("projector 'vector' must be nonzero");
    e /= nrm;
    return e * e.transpose();
  }
  if (kind == "custom-matrix") {
    const Json& rows = spec.contains("matrix") ? spec["matrix"] : Json();
    if (!rows.is_array() || rows.size() != m) {
      throw ConfigError("custom-matrix needs an " + std::to_string(m) + " x " + std::to_string(m) + " 'matrix'");
    }
    Eigen::MatrixXd C(md, md);
    for (std::size_t i = 0; i < m; ++i) {
      if (!rows[i].is_array() || rows[i].size() != m) throw ConfigError("custom-matrix row " + std::to_string(i) + " has the wrong length");
      for (std::size_t j = 0; j < m; ++j) {
        if (!rows[i][j].is_number()) throw ConfigError("custom-matrix entries must be numbers");
        C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
      }
    }
    if (core::operator_norm(C) > 1.0 + 1e-12) throw ConfigError("custom-matrix must be a contraction (norm <= 1)");
    return C;
  }
  throw ConfigError("unknown operator kind '" + kind + "'");
}

}  // namespace chaosflow::experiments
