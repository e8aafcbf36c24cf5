#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace chaosflow::experiments {

using Json = nlohmann::ordered_json;

// Schema or value error in a run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fully populated default configuration of an experiment; it doubles as the schema.
Json default_config(const std::string& experiment);

// Merges `user` into the defaults. Every key of `user` must exist in the defaults with a compatible
// JSON type (integers are accepted where numbers are expected); arrays replace the default wholesale.
// An optional top-level "experiment" key must name the same experiment.
Json resolve_config(const std::string& experiment, const Json& user);

// Parses a JSON file; I/O and syntax problems are reported as ConfigError.
Json load_config_file(const std::string& path);

// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const Json& config);

// Typed accessors that name the offending key on failure.
double get_double(const Json& config, const std::string& key);
std::size_t get_size(const Json& config, const std::string& key);
std::uint64_t get_u64(const Json& config, const std::string& key);
int get_int(const Json& config, const std::string& key);

// Operator spec {"kind": identity|scalar|projector|ou|custom-matrix, "value", "time", "vector", "matrix"}
// resolved on an m-dimensional basis. projector without "vector" uses the constant unit vector.
Eigen::MatrixXd operator_matrix(const Json& spec, std::size_t m);

}  // namespace chaosflow::experiments
