// kinfp <experiment> [--config PATH] [--strict] [--out DIR] [--seed N] [--set key.path=JSON]...

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kinfp/errors.hpp"
#include "kinfp/experiments.hpp"
#include "kinfp/io_util.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitStrict = 4;

// "solver.dt=2e-3" sets doc[<experiment>]["solver"]["dt"] = 2e-3. The value is
// parsed as JSON, falling back to a plain string.
void apply_override(json& doc, const std::string& id, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw kinfp::ConfigError(fmt::format("--set: expected key=value, got '{}'", spec));
  std::string path = "/" + id + "/";
  for (char c : spec.substr(0, eq)) path += c == '.' ? '/' : c;
  json value;
  try {
    value = json::parse(spec.substr(eq + 1));
  } catch (const json::parse_error&) {
    value = spec.substr(eq + 1);
  }
  if (!doc.contains(id)) doc[id] = json::object();
  // Start from the defaults so that nested keys resolve; unknown keys are
  // still rejected by the schema check.
  json merged = kinfp::default_parameters(id);
  merged.merge_patch(doc[id]);
  const json::json_pointer ptr(path.substr(id.size() + 1));
  if (!merged.contains(ptr)) throw kinfp::ConfigError(fmt::format("--set: unknown key '{}'", spec.substr(0, eq)));
  doc[id][ptr] = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic Fokker-Planck experiments"};
  std::string id, config, out;
  std::uint64_t seed = 0;
  bool strict = false, print_defaults = false;
  std::vector<std::string> sets;
  std::string ids;
  for (const auto& e : kinfp::experiment_ids()) ids += (ids.empty() ? "" : ", ") + e;
  app.add_option("experiment", id, "One of: " + ids + "; or 'list'")->required();
  app.add_option("--config", config, "JSON config file");
  app.add_flag("--strict", strict, "Exit with status 4 when a check fails");
  auto* out_opt = app.add_option("--out", out, "Output root directory");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  app.add_option("--set", sets, "Override a parameter, e.g. --set solver.dt=2e-3");
  app.add_flag("--print-defaults", print_defaults, "Print the default parameters and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (id == "list") {
    for (const auto& e : kinfp::experiment_ids()) fmt::print("{}\n", e);
    return 0;
  }
  kinfp::ExperimentConfig cfg;
  try {
    if (print_defaults) {
      fmt::print("{}\n", json{{id, kinfp::default_parameters(id)}}.dump(2));
      return 0;
    }
    json doc = json::object();
    if (!config.empty()) {
      try {
        doc = json::parse(kinfp::read_file(config));
      } catch (const json::parse_error& e) {
        throw kinfp::ConfigError(fmt::format("{}: {}", config, e.what()));
      } catch (const std::runtime_error& e) {
        throw kinfp::ConfigError(e.what());
      }
    }
    for (const auto& s : sets) apply_override(doc, id, s);
    cfg = kinfp::ExperimentConfig::from_document(id, doc);
    if (*out_opt) cfg.out_root = out;
    if (*seed_opt) cfg.seed = seed;
  } catch (const std::exception& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  }

  kinfp::ExperimentResult res;
  try {
    res = kinfp::run_experiment(cfg);
  } catch (const kinfp::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const kinfp::NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return kExitNumerical;
  } catch (const kinfp::DomainError& e) {
    fmt::print(stderr, "domain error: {}\n", e.what());
    return kExitNumerical;
  } catch (const kinfp::ConvergenceError& e) {
    fmt::print(stderr, "convergence error: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }

  fmt::print("{} -> {}\n", res.id, res.dir.string());
  for (const auto& c : res.checks) fmt::print("  {} {:<24} {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
  for (const auto& [stage, s] : res.timings) fmt::print("  time {:<20} {:.2f} s\n", stage, s);
  if (strict && !res.pass()) return kExitStrict;
  return 0;
}
