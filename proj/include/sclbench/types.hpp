#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace sclbench {

using Features = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// One element of a stream: a feature vector, its class and the concept that produced it.
struct LabeledExample {
  Features features;
  int label = 0;
  int concept_id = 0;

  friend bool operator==(const LabeledExample& a, const LabeledExample& b) {
    return a.label == b.label && a.concept_id == b.concept_id &&
           a.features.size() == b.features.size() && a.features == b.features;
  }
};

using ExampleSet = std::vector<LabeledExample>;

/// Predicted class plus per-class scores (probabilities, votes or logits depending on the model).
struct Prediction {
  int label = 0;
  Eigen::VectorXd scores;
};

/// Index of the largest score; ties go to the lowest index. Empty input yields 0.
inline int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = static_cast<int>(c);
  }
  return best;
}

/// SplitMix64 finalizer; used to derive independent seeds from tuples of integers.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) { return mix_seed(mix_seed(a) ^ b); }

inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return derive_seed(derive_seed(a, b), c);
}

}  // namespace sclbench
