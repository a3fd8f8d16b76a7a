// roughlog: command-line front end. Every subcommand reads a JSON experiment
// config; flags override the output directory, the seed and the verify level.

#include "roughlog/config.hpp"
#include "roughlog/run.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

using roughlog::Error;
using roughlog::ErrorKind;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string level;
};

json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, path + ": cannot open");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, path + ": " + e.what());
  }
}

int execute(const std::string& task, const Flags& f) {
  json doc = f.config.empty() ? json::object() : read_document(f.config);
  if (!doc.is_object()) throw Error(ErrorKind::config, "<root>: expected an object");
  if (!doc.contains("task")) doc["task"] = json::object();
  json& t = doc["task"];
  if (!t.is_object()) throw Error(ErrorKind::config, "task: expected an object");
  if (t.contains("name") && t["name"] != task) {
    throw Error(ErrorKind::config, "task.name: config asks for " + t["name"].dump() + " but the subcommand is " + task);
  }
  t["name"] = task;
  if (!f.level.empty()) t["level"] = f.level;
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.out.empty()) doc["output"] = f.out;

  const roughlog::ExperimentConfig cfg = roughlog::parse_config(doc);
  const roughlog::RunArtifact art = roughlog::run(cfg, std::cout);
  std::cout << (art.exit_code == roughlog::exit_pass ? "all checks passed" : "checks failed") << "; artifacts in "
            << art.directory << "\n";
  return art.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degenerate logistic problems on rough domains: eigenvalues, semigroups, steady states."};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> tasks = {
      {"eig", "principal eigenpair of A (+ m when a weight is given)"},
      {"lstar", "limit of lambda1(A + gamma m) as gamma grows"},
      {"solve", "positive steady state of the logistic problem"},
      {"branch", "continuation of the steady state along a lambda grid"},
      {"semigroup-check", "Kato, sandwich, Trotter, submarkov and positivity checks"},
      {"verify", "acceptance suite"},
  };
  for (const auto& [name, help] : tasks) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto* cfg = sub->add_option("--config", flags.config, "JSON experiment config")->check(CLI::ExistingFile);
    if (name != "verify") cfg->required();
    sub->add_option("--out", flags.out, "output directory (overrides the config)");
    sub->add_option("--seed", flags.seed, "random seed (overrides the config)");
    if (name == "verify") {
      sub->add_option("--level", flags.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : roughlog::exit_usage;
  }

  std::string task;
  for (const CLI::App* sub : app.get_subcommands()) task = sub->get_name();
  if (task == "verify" && flags.config.empty() && !flags.seed) flags.seed = roughlog::default_seed;
  try {
    return execute(task, flags);
  } catch (const Error& e) {
    std::cerr << "roughlog: " << e.what() << "\n";
    return e.kind() == ErrorKind::config || e.kind() == ErrorKind::io ? roughlog::exit_usage : roughlog::exit_check_failed;
  } catch (const std::exception& e) {
    std::cerr << "roughlog: " << e.what() << "\n";
    return roughlog::exit_check_failed;
  }
}
