#pragma once

#include "sclbench/drift.hpp"
#include "sclbench/learner.hpp"

#include <deque>
#include <map>
#include <vector>

namespace sclbench {

/// sqrt(R^2 ln(1/delta) / (2n)).
double hoeffding_bound(double range, double delta, double n);

// ---------------------------------------------------------------------------

/// Gaussian naive Bayes with Welford running moments per class and feature.
class NaiveBayes final : public Learner {
 public:
  static constexpr double kVarianceFloor = 1e-6;

  explicit NaiveBayes(int input_dim, int num_classes = 2);

  void learn_one(const LabeledExample& e);
  void learn(std::span<const LabeledExample> batch) override;
  Prediction predict(const Features& x) const override;
  Checkpoint snapshot() const override;
  int input_dim() const override { return dim_; }
  std::string name() const override { return "nb"; }

  double count(int c) const { return counts_[c]; }
  Eigen::VectorXd mean(int c) const { return means_.col(c); }
  /// Population variance (without the floor).
  Eigen::VectorXd variance(int c) const;

 private:
  int dim_;
  Eigen::VectorXd counts_;
  Eigen::MatrixXd means_;  // dim x classes
  Eigen::MatrixXd m2_;     // dim x classes
};

// ---------------------------------------------------------------------------

struct HoeffdingTreeParams {
  double grace_period = 200.0;
  double delta = 1e-7;
  /// Split anyway once the bound falls below this (VFDT tie breaking).
  double tie_threshold = 0.05;
  /// Distinct values tracked per feature and leaf; further values merge into the nearest one.
  int max_values_per_feature = 64;

  friend bool operator==(const HoeffdingTreeParams&, const HoeffdingTreeParams&) = default;
};

/// VFDT-style tree with binary threshold splits chosen by information gain.
class HoeffdingTree final : public Learner {
 public:
  HoeffdingTree(int input_dim, int num_classes = 2, HoeffdingTreeParams params = {});

  /// Trains on `e` with an integer-valued weight (online bagging passes the Poisson draw).
  void learn_one(const LabeledExample& e, double weight = 1.0);
  void learn(std::span<const LabeledExample> batch) override;
  Prediction predict(const Features& x) const override;
  Checkpoint snapshot() const override;
  int input_dim() const override { return dim_; }
  std::string name() const override { return "hoeffding"; }

  std::size_t leaf_count() const;
  std::size_t node_count() const { return nodes_.size(); }
  /// Sum of leaf weights; equals the total weight learned.
  double total_leaf_weight() const;
  /// True iff every leaf's weight equals the sum of its class counts.
  bool leaf_counts_consistent() const;

 private:
  struct Node {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Eigen::VectorXd class_counts;
    double weight = 0.0;
    double weight_at_last_attempt = 0.0;
    // per feature: value -> class counts
    std::vector<std::map<double, Eigen::VectorXd>> observers;
  };

  int route(const Features& x) const;
  void observe(Node& node, const Features& x, int label, double weight) const;
  void attempt_split(int leaf_index);
  Node make_leaf(const Eigen::VectorXd& counts) const;

  int dim_;
  int classes_;
  HoeffdingTreeParams params_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------

/// Majority vote of the k nearest (Euclidean) samples in a FIFO window of capacity W.
class SlidingKnn final : public Learner {
 public:
  SlidingKnn(int input_dim, int k = 5, std::size_t window = 500, int num_classes = 2);

  void learn_one(const LabeledExample& e);
  void learn(std::span<const LabeledExample> batch) override;
  Prediction predict(const Features& x) const override;
  Checkpoint snapshot() const override;
  int input_dim() const override { return dim_; }
  std::string name() const override { return "knn"; }

  const std::deque<LabeledExample>& window() const { return window_; }

 private:
  int dim_;
  int k_;
  std::size_t capacity_;
  int classes_;
  std::deque<LabeledExample> window_;
};

// ---------------------------------------------------------------------------

/// Member trees split more eagerly than a standalone tree (grace 50, delta 0.01),
/// matching common adaptive random forest defaults.
struct AdaptiveForestParams {
  int trees = 10;
  double lambda = 6.0;
  double detector_delta = 0.002;
  HoeffdingTreeParams tree{.grace_period = 50.0, .delta = 0.01};

  friend bool operator==(const AdaptiveForestParams&, const AdaptiveForestParams&) = default;
};

/// Online bagging over Hoeffding trees; each member has an ADWIN monitor on its own
/// test-then-train error and is replaced by a fresh tree when the monitor fires.
class AdaptiveForest final : public Learner {
 public:
  AdaptiveForest(int input_dim, std::uint64_t seed, AdaptiveForestParams params = {},
                 int num_classes = 2);

  void learn_one(const LabeledExample& e);
  void learn(std::span<const LabeledExample> batch) override;
  Prediction predict(const Features& x) const override;
  Checkpoint snapshot() const override;
  int input_dim() const override { return dim_; }
  std::string name() const override { return "forest"; }

  std::size_t tree_count() const { return trees_.size(); }
  const HoeffdingTree& tree(std::size_t i) const { return trees_[i]; }
  std::size_t resets() const { return resets_; }
  /// Replication count drawn for one member; exposed for sampler checks.
  int draw_replication();

 private:
  int dim_;
  int classes_;
  AdaptiveForestParams params_;
  Rng rng_;
  std::vector<HoeffdingTree> trees_;
  std::vector<Adwin> detectors_;
  std::size_t resets_ = 0;
};

}  // namespace sclbench
