#pragma once

#include "roughlog/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace roughlog {

struct Check {
  std::string name;
  Scalar value = 0.0;
  Scalar tolerance = 0.0;
  std::string relation;  // "<=", ">", ...
  bool pass = false;
  std::string note;
};

struct RunArtifact {
  std::string directory;
  std::vector<std::string> files;
  std::vector<Check> checks;
  nlohmann::json summary;
  nlohmann::json manifest;
  int exit_code = 0;  // 0 all checks pass, 1 a check failed or a numerical error occurred
};

// Dispatches on cfg.task, writes every artifact into cfg.output and returns
// what was written. Config errors propagate as Error(config); numerical
// failures are recorded in the summary instead.
RunArtifact run(const ExperimentConfig& cfg, std::ostream& log);

// Exit codes of the command-line tool.
constexpr int exit_pass = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;

}  // namespace roughlog
