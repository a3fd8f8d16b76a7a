#pragma once

#include "roughlog/assembly.hpp"
#include "roughlog/domain.hpp"
#include "roughlog/logistic.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace roughlog {

enum class TaskKind { eig, lstar, solve, branch, semigroup_check, verify };

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

struct DomainConfig {
  ShapeSpec shape;
  Scalar h = 1.0 / 32;
  bool node_aligned = true;
};

struct OperatorConfig {
  std::string type = "laplacian";  // laplacian | divergence
  BcKind bc = BcKind::dirichlet;
  Scalar beta = 0.0;  // robin only
  // Constant coefficients for the divergence form.
  Scalar a11 = 1.0, a22 = 1.0, a12 = 0.0, a21 = 0.0;
  Scalar ax = 0.0, ay = 0.0, bx = 0.0, by = 0.0, c = 0.0;
};

// Weights compose: a product multiplies its factors cellwise.
struct WeightConfig {
  std::string kind = "constant";  // constant | bump | indicator | product
  Scalar value = 1.0;             // constant; bump height; indicator value inside
  Scalar outside = 0.0;           // indicator value outside the region
  Scalar cx = 0.5, cy = 0.5, radius = 0.25;
  Scalar x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  std::vector<WeightConfig> factors;
};

struct NonlinearityConfig {
  std::string family = "linear";  // linear | power | log1p | polynomial
  Scalar p = 1.0;
  std::vector<Scalar> coeffs;
};

// A lambda is absolute, lambda1 + offset, or a fraction of lambda*.
struct LambdaSpec {
  std::string mode = "absolute";  // absolute | offset | star_fraction
  Scalar value = 0.0;
};

struct TaskConfig {
  TaskKind kind = TaskKind::eig;
  LambdaSpec lambda;
  std::vector<LambdaSpec> lambdas;  // branch
  bool derivatives = false;
  bool fd_check = false;
  Scalar t = 0.02;
  std::vector<int> n_steps = {16, 32, 64};
  int kato_vectors = 50;
  int gamma_kmax = 30;
  std::string level = "quick";
};

struct Tolerances {
  Scalar eigen_lambda = 1e-12;
  Scalar eigen_residual = 1e-10;
  Scalar lstar = 1e-8;
  Scalar step = 1e-10;
  Scalar agree = 1e-8;
  Scalar residual = 1e-10;
  Scalar pev = 1e-6;
  Scalar kato = 1e-12;
  Scalar semigroup = 1e-8;
};

struct ExperimentConfig {
  DomainConfig domain;
  OperatorConfig op;
  WeightConfig weight;
  NonlinearityConfig g;
  TaskConfig task;
  Tolerances tol;
  std::uint64_t seed = default_seed;
  std::string output = "out";
  nlohmann::json source;  // the parsed document, echoed into the manifest
};

// Throws Error(config) naming the offending field path, e.g. "operator.bc.beta".
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// Built objects.
MaskPtr build_mask(const DomainConfig& cfg);
DiscreteOperator build_operator(const MaskPtr& mask, const OperatorConfig& cfg);
Weight build_weight(const MaskPtr& mask, const WeightConfig& cfg);
Nonlinearity build_nonlinearity(const NonlinearityConfig& cfg);
LogisticOptions build_options(const Tolerances& tol, std::uint64_t seed = default_seed);

}  // namespace roughlog
