#pragma once

#include "roughlog/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace roughlog {

enum class SuiteLevel { quick, full };

SuiteLevel suite_level_from_string(const std::string& name);

/// One acceptance criterion. `value` is the headline measurement compared to
/// `tolerance` through `relation`; `detail` carries the secondary numbers.
struct CriterionResult {
  int id = 0;
  std::string name;
  Scalar value = 0.0;
  Scalar tolerance = 0.0;
  std::string relation;  // e.g. "<=", "in [1.8, 2.2]"
  bool numeric_pass = false;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string detail;

  bool pass() const { return numeric_pass && seconds <= time_limit; }
};

std::vector<int> suite_criteria(SuiteLevel level);

// Runs one criterion. Library errors are caught and reported as a failure.
CriterionResult run_criterion(int id, std::uint64_t seed = default_seed);

// Criteria run concurrently when threads > 1; results keep the suite order.
std::vector<CriterionResult> run_suite(SuiteLevel level, std::uint64_t seed = default_seed, int threads = 1);

// Worker cap from ROUGHLOG_THREADS, default 1.
int worker_count();

std::string format_result(const CriterionResult& r);

}  // namespace roughlog
