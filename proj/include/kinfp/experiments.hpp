#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kinfp {

// What a fit regresses log y against:
//   Power        log t       (slope = exponent)
//   CubicRate    -t^3        (slope = rate in e^{-rate t^3})
//   InverseRate  -1/t        (slope = rate in e^{-rate / t})
enum class FitKind { Power, CubicRate, InverseRate };

struct FitResult {
  FitKind kind = FitKind::Power;
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;  // residual RMS in log y
  double lo = 0.0, hi = 0.0;
  std::size_t points = 0;
  nlohmann::json to_json() const;
};

// Least squares over the pairs with lo <= t <= hi. Throws DomainError for a
// nonpositive value in the window or fewer than 8 points.
FitResult fit_exponent(std::span<const double> t, std::span<const double> y, double lo, double hi,
                       FitKind kind = FitKind::Power);

const std::vector<std::string>& experiment_ids();

// The full parameter set with every default; it doubles as the schema.
nlohmann::json default_parameters(std::string_view id);

struct ExperimentConfig {
  std::string id;
  nlohmann::json params;  // complete, defaults merged in
  std::uint64_t seed = 20240611;
  std::filesystem::path out_root = "kinfp-out";

  // Document layout: {"seed": N, "out": DIR, "<experiment id>": {...}, ...}.
  // Every section present is checked against its schema: unknown keys,
  // type mismatches and unknown sections throw ConfigError.
  static ExperimentConfig from_document(std::string_view id, const nlohmann::json& doc);
  static ExperimentConfig defaults(std::string_view id);

  // SHA-256 over id, seed and parameters (canonical dump).
  std::string hash() const;
  std::filesystem::path artifact_dir() const;
};

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct ExperimentResult {
  std::string id;
  std::filesystem::path dir;
  std::vector<Check> checks;
  // Wall-clock seconds per named stage; reported, never written to the
  // artifacts (which stay bitwise reproducible).
  std::vector<std::pair<std::string, double>> timings;
  nlohmann::json summary;

  bool pass() const;
  const Check& check(std::string_view name) const;  // throws std::out_of_range
  double seconds(std::string_view stage) const;     // 0 when absent
};

// Validates the typed parameters, runs, writes the artifacts and the
// manifest. ConfigError for invalid parameters (thrown before any compute);
// NumericalError / DomainError / ConvergenceError from the computation.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace kinfp
