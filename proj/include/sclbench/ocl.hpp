#pragma once

#include "sclbench/learner.hpp"
#include "sclbench/mlp.hpp"

#include <optional>
#include <vector>

namespace sclbench {

/// Bounded example store filled by reservoir sampling (Algorithm R).
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = 500) : capacity_(capacity) {}

  void reservoir_update(std::span<const LabeledExample> batch, Rng& rng);
  /// Up to `count` distinct stored examples, uniformly without replacement.
  ExampleSet sample(std::size_t count, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t seen() const { return seen_; }
  bool empty() const { return items_.empty(); }
  const ExampleSet& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::size_t seen_ = 0;
  ExampleSet items_;
};

enum class OclStrategy { naive, replay, agem };

const char* to_string(OclStrategy s);

enum class WeightInit { glorot, fan_in_uniform };

struct OclConfig {
  OclStrategy strategy = OclStrategy::naive;
  WeightInit init = WeightInit::fan_in_uniform;
  int hidden = 512;
  int classes = 2;
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::size_t memory_capacity = 500;
  std::size_t replay_size = 10;  ///< ER replay sample and AGEM reference batch

  friend bool operator==(const OclConfig&, const OclConfig&) = default;
};

/// Inference-only copy of network parameters.
class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(MlpParams<double> params) : params_(std::move(params)) {}
  Prediction predict(const Features& x) const override;
  int input_dim() const override { return params_.input_dim(); }
  const MlpParams<double>& params() const { return params_; }

 private:
  MlpParams<double> params_;
};

/// Online continual learner: one SGD step per minibatch, optionally with experience replay
/// or AGEM gradient projection against a reservoir memory.
class OclLearner final : public Learner {
 public:
  OclLearner(int input_dim, std::uint64_t seed, OclConfig config = {});

  void learn(std::span<const LabeledExample> batch) override;
  Prediction predict(const Features& x) const override;
  Checkpoint snapshot() const override;
  int input_dim() const override { return params_.input_dim(); }
  std::string name() const override { return to_string(config_.strategy); }

  const MlpParams<double>& params() const { return params_; }
  const ReplayMemory& memory() const { return memory_; }
  const OclConfig& config() const { return config_; }
  /// Number of AGEM steps whose gradient was projected.
  std::size_t projections() const { return projections_; }

 private:
  OclConfig config_;
  Rng rng_;
  MlpParams<double> params_;
  SgdMomentum<double> optimizer_;
  ReplayMemory memory_;
  std::size_t projections_ = 0;
};

/// Packs features column-wise and labels for mlp_forward / mlp_backward.
std::pair<Eigen::MatrixXd, std::vector<int>> to_batch(std::span<const LabeledExample> examples);

}  // namespace sclbench
