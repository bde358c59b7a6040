#include "kinfp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <fmt/format.h>

#include "experiments_internal.hpp"
#include "kinfp/criteria.hpp"
#include "kinfp/errors.hpp"
#include "kinfp/manifest.hpp"

namespace kinfp {

using json = nlohmann::json;

namespace {

struct Entry {
  const char* id;
  json (*defaults)();
  void (*run)(detail::Context&);
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r{
      {"group-check", detail::group_defaults, detail::run_group},
      {"phi-solve", detail::phi_defaults, detail::run_phi},
      {"regions", detail::regions_defaults, detail::run_regions},
      {"mu-check", detail::mu_defaults, detail::run_mu},
      {"evolve-halfspace", detail::halfspace_defaults, detail::run_halfspace},
      {"evolve-wholespace", detail::wholespace_defaults, detail::run_wholespace},
      {"particles", detail::particles_defaults, detail::run_particles},
      {"nash-check", detail::nash_defaults, detail::run_nash},
      {"poincare-check", detail::poincare_defaults, detail::run_poincare},
      {"combined-check", detail::combined_defaults, detail::run_combined},
      {"profiles", detail::profiles_defaults, detail::run_profiles},
  };
  return r;
}

const Entry& entry(std::string_view id) {
  for (const auto& e : registry())
    if (id == e.id) return e;
  throw ConfigError(fmt::format("unknown experiment '{}'", id));
}

const char* type_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

// User values must match the defaults key by key and type by type. Arrays
// take any length; their elements are checked against the first default
// element when there is one.
void merge_checked(json& base, const json& user, const std::string& where) {
  if (base.is_object()) {
    if (!user.is_object()) throw ConfigError(fmt::format("{}: expected an object, got {}", where, type_name(user)));
    for (const auto& [k, v] : user.items()) {
      if (!base.contains(k)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, k));
      merge_checked(base[k], v, where + "." + k);
    }
    return;
  }
  if (base.is_array()) {
    if (!user.is_array()) throw ConfigError(fmt::format("{}: expected an array, got {}", where, type_name(user)));
    if (!base.empty()) {
      const json proto = base.front();
      json out = json::array();
      for (std::size_t k = 0; k < user.size(); ++k) {
        // an object element keeps the prototype values for keys it omits
        json item = proto;
        merge_checked(item, user[k], fmt::format("{}[{}]", where, k));
        out.push_back(std::move(item));
      }
      base = std::move(out);
    } else {
      base = user;
    }
    return;
  }
  if (std::string(type_name(base)) != type_name(user))
    throw ConfigError(fmt::format("{}: expected {}, got {}", where, type_name(base), type_name(user)));
  base = user;
}

}  // namespace

json FitResult::to_json() const {
  static const char* names[] = {"power", "cubic_rate", "inverse_rate"};
  return {{"kind", names[static_cast<int>(kind)]}, {"slope", slope}, {"intercept", intercept}, {"rms", rms},
          {"window", {lo, hi}}, {"points", points}};
}

FitResult fit_exponent(std::span<const double> t, std::span<const double> y, double lo, double hi, FitKind kind) {
  if (t.size() != y.size()) throw std::invalid_argument("fit_exponent: size mismatch");
  std::vector<double> X, Y;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] >= lo && t[k] <= hi)) continue;
    if (!(y[k] > 0.0) || !std::isfinite(y[k]))
      throw DomainError(fmt::format("fit_exponent: nonpositive value {} at t = {}", y[k], t[k]));
    double x = 0.0;
    switch (kind) {
      case FitKind::Power:
        if (!(t[k] > 0.0)) throw DomainError("fit_exponent: power fit needs t > 0");
        x = std::log(t[k]);
        break;
      case FitKind::CubicRate: x = -t[k] * t[k] * t[k]; break;
      case FitKind::InverseRate:
        if (t[k] == 0.0) throw DomainError("fit_exponent: inverse-rate fit needs t != 0");
        x = -1.0 / t[k];
        break;
    }
    X.push_back(x);
    Y.push_back(std::log(y[k]));
  }
  if (X.size() < criteria::kMinFitPoints)
    throw DomainError(fmt::format("fit_exponent: {} points in [{}, {}], need at least {}", X.size(), lo, hi,
                                  criteria::kMinFitPoints));
  const double n = static_cast<double>(X.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < X.size(); ++k) mx += X[k], my += Y[k];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < X.size(); ++k) sxx += (X[k] - mx) * (X[k] - mx), sxy += (X[k] - mx) * (Y[k] - my);
  if (!(sxx > 0.0)) throw DomainError("fit_exponent: degenerate abscissae");
  FitResult r;
  r.kind = kind;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    const double e = Y[k] - (r.intercept + r.slope * X[k]);
    ss += e * e;
  }
  r.rms = std::sqrt(ss / n);
  r.lo = lo;
  r.hi = hi;
  r.points = X.size();
  return r;
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& e : registry()) v.emplace_back(e.id);
    return v;
  }();
  return ids;
}

json default_parameters(std::string_view id) { return entry(id).defaults(); }

ExperimentConfig ExperimentConfig::defaults(std::string_view id) { return from_document(id, json::object()); }

ExperimentConfig ExperimentConfig::from_document(std::string_view id, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  c.id = entry(id).id;
  for (const auto& [k, v] : doc.items()) {
    if (k == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError("config: seed must be a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (k == "out") {
      if (!v.is_string()) throw ConfigError("config: out must be a string");
      c.out_root = v.get<std::string>();
    } else {
      json base = entry(k).defaults();  // unknown sections throw here
      merge_checked(base, v, k);
      if (k == c.id) c.params = std::move(base);
    }
  }
  if (c.params.is_null()) c.params = entry(id).defaults();
  return c;
}

std::string ExperimentConfig::hash() const {
  const json canon{{"id", id}, {"seed", seed}, {"params", params}};
  return sha256_hex(canon.dump());
}

std::filesystem::path ExperimentConfig::artifact_dir() const { return out_root / (id + "-" + hash().substr(0, 12)); }

bool ExperimentResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check& ExperimentResult::check(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range(fmt::format("no check named '{}' in {}", name, id));
}

double ExperimentResult::seconds(std::string_view stage) const {
  for (const auto& [k, v] : timings)
    if (k == stage) return v;
  return 0.0;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto& e = entry(cfg.id);
  ExperimentResult res;
  res.id = cfg.id;
  res.dir = cfg.artifact_dir();
  detail::Context cx(cfg, res);
  e.run(cx);
  auto checks = json::array();
  for (const auto& c : res.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"detail", c.detail}});
  cx.out.write_json("summary.json", res.summary);
  cx.out.write_manifest({{"experiment", cfg.id},
                         {"config_hash", cfg.hash()},
                         {"seed", cfg.seed},
                         {"params", cfg.params},
                         {"checks", checks},
                         {"pass", res.pass()}});
  return res;
}

namespace detail {

Context::Context(const ExperimentConfig& c, ExperimentResult& res) : cfg(c), p(c.params), out(res.dir), res_(res) {}

void Context::check(std::string name, bool pass, double value, std::string detail) {
  res_.checks.push_back({std::move(name), pass, value, std::move(detail)});
}

void Context::timing(std::string stage, double seconds) { res_.timings.emplace_back(std::move(stage), seconds); }

void Context::summary(const std::string& key, json value) { res_.summary[key] = std::move(value); }

double positive(const json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("{} must be positive, got {}", key, v));
  return v;
}

double finite(const json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError(fmt::format("{} must be finite", key));
  return v;
}

std::size_t count(const json& j, const char* key, std::size_t min) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
    throw ConfigError(fmt::format("{} must be an integer >= {}", key, min));
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const char* key, std::size_t min_size) {
  const auto& a = j.at(key);
  std::vector<double> out;
  for (const auto& x : a) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) throw ConfigError(fmt::format("{}: expected numbers", key));
    out.push_back(x.get<double>());
  }
  if (out.size() < min_size) throw ConfigError(fmt::format("{}: need at least {} entries", key, min_size));
  return out;
}

AxisSpec axis_spec(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const double lo = finite(j, "min"), hi = finite(j, "max");
  if (!(hi > lo)) throw ConfigError("axis: max must exceed min");
  if (kind == "uniform") return AxisSpec::uniform(lo, hi, count(j, "cells", 1));
  if (kind == "graded")
    return AxisSpec::graded(lo, hi, finite(j, "anchor"), positive(j, "finest"), positive(j, "ratio"),
                            positive(j, "max_width"));
  throw ConfigError(fmt::format("axis: unknown kind '{}'", kind));
}

InitialData initial_data(const json& j) {
  InitialData d;
  for (const auto& b : j) {
    GaussianBump g;
    g.x0 = finite(b, "x0");
    g.v0 = finite(b, "v0");
    g.sx = positive(b, "sx");
    g.sv = positive(b, "sv");
    g.amplitude = finite(b, "amplitude");
    g.cutoff = positive(b, "cutoff");
    if (g.amplitude < 0.0) throw ConfigError("f_in: amplitude must be nonnegative");
    d.bumps.push_back(g);
  }
  return d;
}

Coefficient coefficient(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return Coefficient::constant(positive(j, "value"));
  if (kind == "sin_v") return Coefficient::sin_v(finite(j, "base"), finite(j, "amp"), finite(j, "freq"));
  throw ConfigError(fmt::format("a: unknown kind '{}'", kind));
}

PhaseBox phase_box(const json& j) {
  if (!j.is_array() || j.size() != 6) throw ConfigError("box: expected [t0, t1, x0, x1, v0, v1]");
  double b[6];
  for (int k = 0; k < 6; ++k) {
    b[k] = j[k].get<double>();
    if (!std::isfinite(b[k])) throw ConfigError("box: entries must be finite");
  }
  if (!(b[1] > b[0] && b[3] > b[2] && b[5] > b[4])) throw ConfigError("box: empty");
  return {b[0], b[1], b[2], b[3], b[4], b[5]};
}

json solver_defaults(DomainMode mode) {
  json j;
  j["mode"] = mode == DomainMode::HalfSpace ? "half-space" : "whole-space";
  j["x"] = {{"kind", "uniform"}, {"min", 0.0}, {"max", 10.0}, {"cells", 200}, {"anchor", 0.0}, {"finest", 0.01},
            {"ratio", 1.05}, {"max_width", 0.1}};
  j["v"] = j["x"];
  j["v"]["min"] = -10.0;
  j["dt"] = 1e-3;
  j["t_end"] = 1.0;
  j["theta"] = 1.0;
  j["fine"] = {{"length", 0.0}, {"dt", 0.0}};
  j["a"] = {{"kind", "constant"}, {"value", 1.0}, {"base", 1.0}, {"amp", 0.0}, {"freq", 1.0}};
  j["f_in"] = json::array({{{"x0", 1.0}, {"v0", 0.0}, {"sx", 0.2}, {"sv", 0.4}, {"amplitude", 1.0}, {"cutoff", 4.5}}});
  j["outputs"] = json::array();
  j["R_list"] = json::array();
  return j;
}

SolverConfig solver_config(const json& j) {
  SolverConfig c;
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "half-space") c.mode = DomainMode::HalfSpace;
  else if (mode == "whole-space") c.mode = DomainMode::WholeSpace;
  else throw ConfigError(fmt::format("solver: unknown mode '{}'", mode));
  try {
    c.x = axis_spec(j.at("x"));
    c.v = axis_spec(j.at("v"));
    (void)CellAxis(c.x);
    (void)CellAxis(c.v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("solver axis: {}", e.what()));
  }
  c.dt = positive(j, "dt");
  c.t_end = positive(j, "t_end");
  c.theta = finite(j, "theta");
  c.fine = {finite(j.at("fine"), "length"), finite(j.at("fine"), "dt")};
  c.a = coefficient(j.at("a"));
  c.f_in = initial_data(j.at("f_in"));
  c.output_times = numbers(j, "outputs");
  c.R_list = numbers(j, "R_list");
  c.validate();
  return c;
}

std::string fmt_num(double v) { return fmt::format("{:.10g}", v); }

}  // namespace detail

}  // namespace kinfp
