#include "sclbench/ocl.hpp"

#include <algorithm>
#include <numeric>

namespace sclbench {

void ReplayMemory::reservoir_update(std::span<const LabeledExample> batch, Rng& rng) {
  for (const auto& e : batch) {
    ++seen_;
    if (capacity_ == 0) continue;
    if (items_.size() < capacity_) {
      items_.push_back(e);
      continue;
    }
    const auto j = std::uniform_int_distribution<std::size_t>(0, seen_ - 1)(rng);
    if (j < capacity_) items_[j] = e;
  }
}

ExampleSet ReplayMemory::sample(std::size_t count, Rng& rng) const {
  ExampleSet out;
  if (items_.empty() || count == 0) return out;
  std::vector<std::size_t> index(items_.size());
  std::iota(index.begin(), index.end(), 0);
  const std::size_t k = std::min(count, index.size());
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = std::uniform_int_distribution<std::size_t>(i, index.size() - 1)(rng);
    std::swap(index[i], index[j]);
  }
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(items_[index[i]]);
  return out;
}

const char* to_string(OclStrategy s) {
  switch (s) {
    case OclStrategy::naive:
      return "naive";
    case OclStrategy::replay:
      return "er";
    case OclStrategy::agem:
      return "agem";
  }
  return "?";
}

std::pair<Eigen::MatrixXd, std::vector<int>> to_batch(std::span<const LabeledExample> examples) {
  if (examples.empty()) throw std::invalid_argument("empty minibatch");
  const auto dim = examples.front().features.size();
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(examples.size()));
  std::vector<int> y;
  y.reserve(examples.size());
  for (std::size_t j = 0; j < examples.size(); ++j) {
    if (examples[j].features.size() != dim) {
      throw std::invalid_argument("minibatch mixes feature dimensions");
    }
    x.col(static_cast<Eigen::Index>(j)) = examples[j].features;
    y.push_back(examples[j].label);
  }
  return {std::move(x), std::move(y)};
}

namespace {

Prediction predict_with(const MlpParams<double>& params, const Features& x) {
  check_dim(x, params.input_dim());
  Eigen::VectorXd logits = mlp_forward(params, x);
  return {argmax_lowest(logits), std::move(logits)};
}

}  // namespace

Prediction MlpClassifier::predict(const Features& x) const { return predict_with(params_, x); }

OclLearner::OclLearner(int input_dim, std::uint64_t seed, OclConfig config)
    : config_(config),
      rng_(seed),
      params_(config.init == WeightInit::glorot
                  ? MlpParams<double>::glorot(input_dim, config.hidden, config.classes, rng_)
                  : MlpParams<double>::fan_in_uniform(input_dim, config.hidden, config.classes,
                                                      rng_)),
      optimizer_(params_, config.learning_rate, config.momentum),
      memory_(config.memory_capacity) {
  if (input_dim <= 0 || config.hidden <= 0 || config.classes < 2) {
    throw std::invalid_argument("OclLearner: bad network shape");
  }
}

void OclLearner::learn(std::span<const LabeledExample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty minibatch");
  for (const auto& e : batch) check_dim(e.features, input_dim());

  switch (config_.strategy) {
    case OclStrategy::naive: {
      const auto [x, y] = to_batch(batch);
      optimizer_.step(params_, mlp_backward(params_, x, std::span<const int>(y)).first);
      break;
    }
    case OclStrategy::replay: {
      ExampleSet joint(batch.begin(), batch.end());
      const ExampleSet replayed = memory_.sample(config_.replay_size, rng_);
      joint.insert(joint.end(), replayed.begin(), replayed.end());
      const auto [x, y] = to_batch(joint);
      optimizer_.step(params_, mlp_backward(params_, x, std::span<const int>(y)).first);
      memory_.reservoir_update(batch, rng_);
      break;
    }
    case OclStrategy::agem: {
      const auto [x, y] = to_batch(batch);
      MlpParams<double> grads = mlp_backward(params_, x, std::span<const int>(y)).first;
      if (!memory_.empty()) {
        const ExampleSet reference = memory_.sample(config_.replay_size, rng_);
        const auto [rx, ry] = to_batch(reference);
        const auto g = grads.flatten();
        const auto g_ref = mlp_backward(params_, rx, std::span<const int>(ry)).first.flatten();
        if (g.dot(g_ref) < 0.0) {
          grads.unflatten(agem_project(g, g_ref));
          ++projections_;
        }
      }
      optimizer_.step(params_, grads);
      memory_.reservoir_update(batch, rng_);
      break;
    }
  }
}

Prediction OclLearner::predict(const Features& x) const { return predict_with(params_, x); }

Checkpoint OclLearner::snapshot() const { return std::make_shared<const MlpClassifier>(params_); }

}  // namespace sclbench
