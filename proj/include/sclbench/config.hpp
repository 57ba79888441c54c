#pragma once

#include "sclbench/classic.hpp"
#include "sclbench/eval.hpp"
#include "sclbench/ocl.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sclbench {

// Experiment files are INI-like: `[section]` headers, `key = value` lines, `#` comments.
// Sections: [scenario], [evaluation], [output] and one [strategy.<name>] per strategy.
// Unknown sections or keys are errors.

struct ScenarioConfig {
  std::string kind = "virtual";  ///< virtual | real | csv
  int examples_per_concept = 2000;
  int test_per_concept = 500;
  double noise = 0.05;
  std::vector<std::uint64_t> seeds;
  std::optional<std::vector<int>> task_order;  ///< real only; default is a seeded permutation
  std::string path;                            ///< csv only

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

enum class StrategyKind { naive, er, agem, forest, hoeffding, nb, knn };

const char* to_string(StrategyKind kind);
bool is_neural(StrategyKind kind);

struct StrategyConfig {
  std::string name;
  StrategyKind kind = StrategyKind::naive;
  OclConfig ocl;
  AdaptiveForestParams forest;
  HoeffdingTreeParams tree;
  int knn_k = 5;
  std::size_t knn_window = 500;
  /// When set, the learner is built for this dimension instead of the scenario's.
  std::optional<int> input_dim;

  friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

struct EvaluationConfig {
  std::size_t window = 1000;
  std::size_t classical_batch = 1;
  std::size_t neural_batch = 10;
  BoundaryMode boundaries = BoundaryMode::known;

  friend bool operator==(const EvaluationConfig&, const EvaluationConfig&) = default;
};

struct OutputConfig {
  std::string dir = "results";
  std::size_t jobs = 1;
  std::uint64_t master_seed = 0;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<StrategyConfig> strategies;
  EvaluationConfig evaluation;
  OutputConfig output;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError naming the key and line on any problem.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Fresh learner for a strategy; `seed` drives all of its randomness.
std::unique_ptr<Learner> make_learner(const StrategyConfig& strategy, int scenario_dim,
                                      std::uint64_t seed);

}  // namespace sclbench
