#pragma once

#include "sclbench/config.hpp"
#include "sclbench/eval.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sclbench {

/// Outcome of one (strategy, seed) cell.
struct RunResult {
  std::string strategy;
  std::string scenario;
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;

  PrequentialTrace trace;
  std::vector<std::int64_t> drift_boundaries;  ///< scenario schedule boundaries
  Eigen::MatrixXd kappa_matrix;
  double k_avg = 0.0;
  double bwt = 0.0;
  double aaa = 0.0;
};

/// Seed used to build the scenario for a configured seed value.
std::uint64_t scenario_seed(std::uint64_t master_seed, std::uint64_t seed);
/// Seed for the learner of one grid cell.
std::uint64_t learner_seed(std::uint64_t master_seed, const std::string& strategy,
                           std::size_t seed_index);

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t master_seed, std::uint64_t seed);

/// Runs one cell; never throws, failures are reported in the result.
RunResult run_cell(const ExperimentConfig& config, const Scenario& scenario,
                   const StrategyConfig& strategy, std::size_t seed_index,
                   std::uint64_t master_seed);

/// Every (strategy, seed) cell, strategy-major in configuration order. Results do not depend
/// on `jobs`. When `out_dir` is non-empty each worker writes its cell's files there.
std::vector<RunResult> run_grid(const ExperimentConfig& config, std::size_t jobs,
                                std::uint64_t master_seed, const std::filesystem::path& out_dir = {});

// ---------------------------------------------------------------------------

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;

  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

/// Mean and sample standard deviation (n - 1; 0 for a single value). Throws on empty input.
MetricSummary summarize(const std::vector<double>& values);

struct SummaryRow {
  std::string strategy;
  std::string scenario;
  std::size_t runs = 0;
  MetricSummary k_avg;
  MetricSummary bwt;
  MetricSummary aaa;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// One row per (strategy, scenario) with at least one successful run, in first-seen order.
/// Throws std::runtime_error if a (strategy, scenario) cell has no successful run.
std::vector<SummaryRow> aggregate_runs(const std::vector<RunResult>& runs);

}  // namespace sclbench
