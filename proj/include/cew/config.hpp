#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cew/environment.hpp"
#include "cew/learner.hpp"

namespace cew {

struct RunConfig {
  EnvironmentSpec env;
  LearnerConfig learner;
  std::uint64_t seed = 1;
  int replications = 1;
  int workers = 0;  // 0: CEW_WORKERS, else 1
  std::string output = "out";
  bool write_diagnostics = false;
  long environment_check_samples = 100000;

  // Cross-module checks: learner/environment compatibility on top of
  // EnvironmentSpec::validate().
  void validate() const;
};

// Sectioned `key = value` text; see docs/formats.md. Unknown sections or
// keys are errors. Throws ConfigError with the offending key.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
// Throws std::ios_base::failure if the file cannot be opened.
RunConfig load_config(const std::string& path);

// d = 2, K = 3 reference instance: truncated Gaussian contexts around
// (0.5, 0.3) and three fixed arms of norm <= 1.
EnvironmentSpec default_environment(long T);

// Comma separated reals.
Vector parse_vector(const std::string& text);

}  // namespace cew
