#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "json.hpp"
#include "kinfp/experiments.hpp"
#include "kinfp/fp_solver.hpp"
#include "kinfp/kinetic_group.hpp"
#include "kinfp/manifest.hpp"

namespace kinfp::detail {

using json = nlohmann::json;

class Context {
 public:
  Context(const ExperimentConfig& cfg, ExperimentResult& res);

  const ExperimentConfig& cfg;
  const json& p;
  ArtifactWriter out;

  void check(std::string name, bool pass, double value, std::string detail);
  void timing(std::string stage, double seconds);
  void summary(const std::string& key, json value);

 private:
  ExperimentResult& res_;
};

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_;
};

// Typed accessors; throw ConfigError naming the key.
double positive(const json& j, const char* key);
double finite(const json& j, const char* key);
std::size_t count(const json& j, const char* key, std::size_t min = 1);
std::vector<double> numbers(const json& j, const char* key, std::size_t min_size = 0);

// {"kind": "uniform", "min", "max", "cells"} or
// {"kind": "graded", "min", "max", "anchor", "finest", "ratio", "max_width"}
AxisSpec axis_spec(const json& j);
// [{"x0", "v0", "sx", "sv", "amplitude", "cutoff"}, ...]
InitialData initial_data(const json& j);
// {"kind": "constant", "value"} or {"kind": "sin_v", "base", "amp", "freq"}
Coefficient coefficient(const json& j);
// [t0, t1, x0, x1, v0, v1]
PhaseBox phase_box(const json& j);
// Solver block: mode, x, v, dt, t_end, theta, fine, a, f_in, outputs, R_list.
SolverConfig solver_config(const json& j);
json solver_defaults(DomainMode mode);

std::string fmt_num(double v);

// Experiment entry points (ids in experiment_ids()).
json group_defaults();
void run_group(Context& cx);
json phi_defaults();
void run_phi(Context& cx);
json regions_defaults();
void run_regions(Context& cx);
json mu_defaults();
void run_mu(Context& cx);
json halfspace_defaults();
void run_halfspace(Context& cx);
json wholespace_defaults();
void run_wholespace(Context& cx);
json profiles_defaults();
void run_profiles(Context& cx);
json particles_defaults();
void run_particles(Context& cx);
json nash_defaults();
void run_nash(Context& cx);
json poincare_defaults();
void run_poincare(Context& cx);
json combined_defaults();
void run_combined(Context& cx);

}  // namespace kinfp::detail
