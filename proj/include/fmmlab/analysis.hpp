#pragma once

// The audit harness: run solve+backtrace under each scalar mode, aggregate
// statistics, serialize reports. Reports are pure functions of
// (scenario bytes, mode, config, seed).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmmlab/grid.hpp"
#include "fmmlab/scalar.hpp"
#include "fmmlab/shadow.hpp"

namespace fmmlab {

struct StochasticReport {
  std::string scenario_name;
  std::uint64_t seed = 0;
  double cost_mean = 0.0;
  double cost_sigma = 0.0;
  double relative_error = 0.0;  // sigma / |mean|
  double significant_digits = 0.0;
  InstabilityCounters counters;
  int path_point_count = 0;

  std::string to_json() const;
};

struct MultiRunReport {
  std::string scenario_name;
  std::uint64_t seed = 0;
  struct Run {
    std::uint64_t seed;
    double cost;
    int path_point_count;
    std::string error;  // empty on success
  };
  std::vector<Run> runs;
  double cost_mean = 0.0;
  double cost_sigma = 0.0;
  double reference_cost = 0.0;  // plain-mode execution
  int reference_point_count = 0;
  bool reference_within_4_sigma = false;

  std::string to_json() const;
};

struct ShadowReport {
  std::string scenario_name;
  ShadowConfig config;
  std::vector<FlowTrace> flows;
  double merged_error_bound = 0.0;  // +inf when some flow's ideal is Top
  std::vector<UnstableSite> unstable_sites;
  int unexplored_flows = 0;

  std::string to_json() const;
};

struct RefinementReport {
  std::string scenario_name;
  int factor = 2;
  struct Level {
    int nx, ny;
    double cost;
    int path_point_count;
  };
  std::vector<Level> resolutions;
  double relative_difference = 0.0;

  std::string to_json() const;
};

struct PlainRunResult {
  double cost = 0.0;
  double goal_T = 0.0;
  int path_point_count = 0;
  std::vector<std::pair<double, double>> path_points;
};

PlainRunResult run_plain(const Scenario& scenario);

StochasticReport run_stochastic(const Scenario& scenario, std::uint64_t seed,
                                bool perturb = true);

MultiRunReport run_multirun(const Scenario& scenario, int n,
                            std::uint64_t seed, bool perturb = true);

ShadowReport run_shadow(const Scenario& scenario, const ShadowConfig& config);

RefinementReport compare_refinement(const Scenario& scenario, int factor);

// Bilinear resampling of the scenario onto a grid with `factor` times more
// cells per side (same physical box, start and goal).
Scenario refine_scenario(const Scenario& scenario, int factor);

}  // namespace fmmlab
