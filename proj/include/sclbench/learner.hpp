#pragma once

#include "sclbench/types.hpp"

#include <memory>
#include <span>
#include <string>

namespace sclbench {

/// Read-only predictor. Checkpoints are shared immutable classifiers.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Prediction predict(const Features& x) const = 0;
  virtual int input_dim() const = 0;
};

using Checkpoint = std::shared_ptr<const Classifier>;

/// A model that learns from a stream of minibatches (size 1 for the classical learners).
class Learner : public Classifier {
 public:
  virtual void learn(std::span<const LabeledExample> batch) = 0;
  /// Deep copy of the inference state; later learning never affects it.
  virtual Checkpoint snapshot() const = 0;
  virtual std::string name() const = 0;
};

/// Throws std::invalid_argument when `x` does not have `dim` entries.
inline void check_dim(const Features& x, int dim) {
  if (x.size() != dim) {
    throw std::invalid_argument("feature dimension mismatch: expected " + std::to_string(dim) +
                                ", got " + std::to_string(x.size()));
  }
}

}  // namespace sclbench
