#include "oracles.hpp"

#include "roughlog/acceptance.hpp"
#include "roughlog/config.hpp"
#include "roughlog/run.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace roughlog;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("roughlog_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json interval_eig() {
  return json::parse(R"({
    "seed": 1,
    "domain": {"shape": "interval", "h": 0.015625},
    "operator": {"type": "laplacian", "bc": {"kind": "dirichlet"}},
    "task": {"name": "eig"}
  })");
}

// Message of the config error raised by parse_config, or "" when it parses.
std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    return e.what();
  }
  return "";
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(interval_eig());
  CHECK(cfg.seed == 1);
  CHECK(cfg.task.kind == TaskKind::eig);
  CHECK(cfg.domain.node_aligned);
  CHECK(build_mask(cfg.domain)->size() == 63);

  json j = interval_eig();
  j.erase("seed");
  CHECK(config_error(j).find("seed") != std::string::npos);

  j = interval_eig();
  j["operator"]["bc"] = {{"kind", "robin"}};
  CHECK(config_error(j).find("operator.bc.beta") != std::string::npos);

  j = interval_eig();
  j["operator"]["bc"]["beta"] = 1.0;
  CHECK(config_error(j).find("operator.bc.beta") != std::string::npos);

  j = interval_eig();
  j["domain"]["hh"] = 0.1;
  CHECK(config_error(j).find("domain.hh") != std::string::npos);

  j = interval_eig();
  j["task"]["name"] = "solve";
  CHECK(config_error(j).find("task.lambda") != std::string::npos);

  j = interval_eig();
  j["weight"] = {{"kind", "product"}, {"factors", json::array({{{"kind", "constant"}}})}};
  CHECK(config_error(j).find("weight.factors[0].value") != std::string::npos);

  j = interval_eig();
  j["domain"]["h"] = -1;
  CHECK(config_error(j).find("domain.h") != std::string::npos);
}

TEST_CASE("weights and operators built from config") {
  json j = interval_eig();
  j["domain"] = {{"shape", "square"}, {"h", 0.0625}, {"grid", "cell"}};
  j["operator"] = {{"type", "divergence"},
                   {"bc", {{"kind", "robin"}, {"beta", 2.0}}},
                   {"coefficients", {{"c", 3.0}}}};
  j["weight"] = {{"kind", "product"},
                 {"factors",
                  {{{"kind", "constant"}, {"value", 2.0}},
                   {{"kind", "indicator"}, {"region", {{"x0", 0.0}, {"x1", 0.5}}}}}}};
  const ExperimentConfig cfg = parse_config(j);
  const MaskPtr m = build_mask(cfg.domain);
  CHECK(m->size() == 256);
  const DiscreteOperator op = build_operator(m, cfg.op);
  const DiscreteOperator ref = shift(assemble_laplacian(m, BoundaryCondition::robin(*m, 2.0)), 3.0);
  CHECK((Matrix(op.matrix) - Matrix(ref.matrix)).cwiseAbs().maxCoeff() <= 1e-12);
  const Weight w = build_weight(m, cfg.weight);
  for (Index c = 0; c < m->size(); ++c) CHECK(w.values[c] == (m->center(c).x() < 0.5 ? 2.0 : 0.0));
}

TEST_CASE("eig task writes the closed-form eigenvalue") {
  json j = interval_eig();
  const fs::path dir = scratch("eig");
  j["output"] = dir.string();
  std::ostringstream log;
  const RunArtifact art = run(parse_config(j), log);
  CHECK(art.exit_code == exit_pass);
  std::istringstream csv(slurp(dir / "eig.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header.rfind("lambda1,", 0) == 0);
  const Scalar l = std::stod(row.substr(0, row.find(',')));
  CHECK(l == doctest::Approx(oracle::dirichlet_1d(1, 1.0 / 64)).epsilon(1e-8));
  CHECK(l == doctest::Approx(9.8678).epsilon(1e-4));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "checks.jsonl"));
  for (const Check& c : art.checks) CHECK(c.pass);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  std::ifstream in(std::string(ROUGHLOG_CONFIGS) + "/solve_neumann.json");
  json j = json::parse(in);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  j["output"] = a.string();
  const RunArtifact ra = run(parse_config(j), log);
  j["output"] = b.string();
  const RunArtifact rb = run(parse_config(j), log);
  CHECK(ra.exit_code == exit_pass);
  REQUIRE(ra.files == rb.files);
  for (const std::string& f : ra.files) {
    if (f == "manifest.json") continue;  // carries timings
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  CHECK(slurp(a / "solution.csv").size() > 0);
}

TEST_CASE("numerical failures land in the summary") {
  json j = interval_eig();
  j["task"] = {{"name", "solve"}, {"lambda", 1.0}};  // below lambda1
  j["weight"] = {{"kind", "constant"}, {"value", 1.0}};
  j["nonlinearity"] = {{"family", "linear"}};
  j["output"] = scratch("fail").string();
  std::ostringstream log;
  const RunArtifact art = run(parse_config(j), log);
  CHECK(art.exit_code == exit_check_failed);
  CHECK(art.summary.contains("error"));
}

TEST_CASE("verify suite levels") {
  CHECK(suite_criteria(SuiteLevel::quick) == std::vector<int>{1, 3, 7, 10, 13});
  std::vector<int> all(15);
  for (int k = 0; k < 15; ++k) all[k] = k + 1;
  CHECK(suite_criteria(SuiteLevel::full) == all);
  CHECK_THROWS_AS(suite_level_from_string("medium"), Error);

  const CriterionResult a = run_criterion(10, 99), b = run_criterion(10, 99);
  CHECK(a.pass());
  CHECK(a.value == b.value);
  CHECK(a.detail == b.detail);
}

TEST_CASE("command-line exit codes") {
  const std::string bin = ROUGHLOG_BIN;
  const std::string configs = ROUGHLOG_CONFIGS;
  const fs::path dir = scratch("cli");

  CHECK(shell(bin + " eig --config " + configs + "/eig_interval.json --out " + (dir / "eig").string()) == 0);
  CHECK(fs::exists(dir / "eig" / "eig.csv"));

  json j = interval_eig();
  j["operator"]["bc"] = {{"kind", "robin"}};
  const fs::path bad = dir / "robin.json";
  std::ofstream(bad) << j.dump();
  CHECK(shell(bin + " eig --config " + bad.string() + " --out " + (dir / "bad").string()) == exit_usage);

  CHECK(shell(bin + " eig") == exit_usage);
  CHECK(shell(bin + " frobnicate") == exit_usage);
  CHECK(shell(bin + " solve --config " + configs + "/eig_interval.json") == exit_usage);  // task mismatch

  const fs::path nolambda = dir / "solve.json";
  j = interval_eig();
  j["task"] = {{"name", "solve"}, {"lambda", 1.0}};
  j["weight"] = {{"kind", "constant"}, {"value", 1.0}};
  j["nonlinearity"] = {{"family", "linear"}};
  std::ofstream(nolambda) << j.dump();
  CHECK(shell(bin + " solve --config " + nolambda.string() + " --out " + (dir / "solve").string()) ==
        exit_check_failed);
}
