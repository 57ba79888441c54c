#include "sclbench/classic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sclbench {

double hoeffding_bound(double range, double delta, double n) {
  if (!(range >= 0.0) || !(delta > 0.0 && delta < 1.0) || !(n >= 1.0)) {
    throw std::invalid_argument("hoeffding_bound: need R >= 0, 0 < delta < 1, n >= 1");
  }
  return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * n));
}

namespace {

void check_label(int label, int classes) {
  if (label < 0 || label >= classes) {
    throw std::invalid_argument("label out of range: " + std::to_string(label));
  }
}

double entropy(const Eigen::Ref<const Eigen::VectorXd>& counts) {
  const double total = counts.sum();
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (Eigen::Index c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0.0) {
      const double p = counts[c] / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

Prediction majority(const Eigen::VectorXd& votes) {
  return {argmax_lowest(votes), votes};
}

}  // namespace

// ---------------------------------------------------------------------------
// NaiveBayes

NaiveBayes::NaiveBayes(int input_dim, int num_classes)
    : dim_(input_dim),
      counts_(Eigen::VectorXd::Zero(num_classes)),
      means_(Eigen::MatrixXd::Zero(input_dim, num_classes)),
      m2_(Eigen::MatrixXd::Zero(input_dim, num_classes)) {
  if (input_dim <= 0 || num_classes < 2) throw std::invalid_argument("NaiveBayes: bad shape");
}

void NaiveBayes::learn_one(const LabeledExample& e) {
  check_dim(e.features, dim_);
  check_label(e.label, static_cast<int>(counts_.size()));
  const int c = e.label;
  counts_[c] += 1.0;
  const Eigen::VectorXd delta = e.features - means_.col(c);
  means_.col(c) += delta / counts_[c];
  m2_.col(c) += delta.cwiseProduct(e.features - means_.col(c));
}

void NaiveBayes::learn(std::span<const LabeledExample> batch) {
  for (const auto& e : batch) learn_one(e);
}

Eigen::VectorXd NaiveBayes::variance(int c) const {
  if (counts_[c] <= 0.0) return Eigen::VectorXd::Zero(dim_);
  return (m2_.col(c) / counts_[c]).cwiseMax(0.0);
}

Prediction NaiveBayes::predict(const Features& x) const {
  check_dim(x, dim_);
  const auto classes = counts_.size();
  const double total = counts_.sum();
  if (total <= 0.0) return {0, Eigen::VectorXd::Zero(classes)};

  Eigen::VectorXd scores(classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    if (counts_[c] <= 0.0) {
      scores[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const Eigen::ArrayXd var = variance(static_cast<int>(c)).array().max(kVarianceFloor);
    const Eigen::ArrayXd diff = x.array() - means_.col(c).array();
    scores[c] = std::log(counts_[c] / total) +
                (-0.5 * (2.0 * std::numbers::pi * var).log() - diff.square() / (2.0 * var)).sum();
  }
  return majority(scores);
}

Checkpoint NaiveBayes::snapshot() const { return std::make_shared<const NaiveBayes>(*this); }

// ---------------------------------------------------------------------------
// HoeffdingTree

HoeffdingTree::HoeffdingTree(int input_dim, int num_classes, HoeffdingTreeParams params)
    : dim_(input_dim), classes_(num_classes), params_(params) {
  if (input_dim <= 0 || num_classes < 2) throw std::invalid_argument("HoeffdingTree: bad shape");
  if (params.grace_period <= 0.0 || !(params.delta > 0.0 && params.delta < 1.0) ||
      params.max_values_per_feature < 2) {
    throw std::invalid_argument("HoeffdingTree: bad parameters");
  }
  nodes_.push_back(make_leaf(Eigen::VectorXd::Zero(classes_)));
}

HoeffdingTree::Node HoeffdingTree::make_leaf(const Eigen::VectorXd& counts) const {
  Node n;
  n.class_counts = counts;
  n.weight = counts.sum();
  n.weight_at_last_attempt = n.weight;
  n.observers.resize(static_cast<std::size_t>(dim_));
  return n;
}

int HoeffdingTree::route(const Features& x) const {
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].leaf) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

void HoeffdingTree::observe(Node& node, const Features& x, int label, double weight) const {
  for (int f = 0; f < dim_; ++f) {
    auto& values = node.observers[static_cast<std::size_t>(f)];
    auto it = values.find(x[f]);
    if (it == values.end()) {
      if (static_cast<int>(values.size()) < params_.max_values_per_feature) {
        it = values.emplace(x[f], Eigen::VectorXd::Zero(classes_)).first;
      } else {
        // merge into the nearest tracked value
        auto hi = values.lower_bound(x[f]);
        if (hi == values.end()) {
          it = std::prev(hi);
        } else if (hi == values.begin()) {
          it = hi;
        } else {
          auto lo = std::prev(hi);
          it = (x[f] - lo->first) <= (hi->first - x[f]) ? lo : hi;
        }
      }
    }
    it->second[label] += weight;
  }
}

void HoeffdingTree::learn_one(const LabeledExample& e, double weight) {
  check_dim(e.features, dim_);
  check_label(e.label, classes_);
  if (weight <= 0.0) return;
  const int leaf = route(e.features);
  Node& node = nodes_[static_cast<std::size_t>(leaf)];
  node.class_counts[e.label] += weight;
  node.weight += weight;
  observe(node, e.features, e.label, weight);
  if (node.weight - node.weight_at_last_attempt >= params_.grace_period) attempt_split(leaf);
}

void HoeffdingTree::learn(std::span<const LabeledExample> batch) {
  for (const auto& e : batch) learn_one(e);
}

void HoeffdingTree::attempt_split(int leaf_index) {
  Node& node = nodes_[static_cast<std::size_t>(leaf_index)];
  node.weight_at_last_attempt = node.weight;
  const double parent_entropy = entropy(node.class_counts);
  if (parent_entropy <= 0.0) return;

  struct Candidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    Eigen::VectorXd left;
  };
  // best candidate per feature; the "no split" option has gain 0
  std::vector<Candidate> per_feature;
  for (int f = 0; f < dim_; ++f) {
    const auto& values = node.observers[static_cast<std::size_t>(f)];
    if (values.size() < 2) continue;
    Candidate best;
    Eigen::VectorXd left = Eigen::VectorXd::Zero(classes_);
    for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
      left += it->second;
      const Eigen::VectorXd right = node.class_counts - left;
      const double wl = left.sum();
      const double wr = right.sum();
      if (wl <= 0.0 || wr <= 0.0) continue;
      const double gain =
          parent_entropy - (wl * entropy(left) + wr * entropy(right)) / (wl + wr);
      if (gain > best.gain) {
        best = {gain, f, 0.5 * (it->first + std::next(it)->first), left};
      }
    }
    if (best.feature >= 0) per_feature.push_back(std::move(best));
  }
  if (per_feature.empty()) return;
  std::sort(per_feature.begin(), per_feature.end(),
            [](const Candidate& a, const Candidate& b) {
              return a.gain > b.gain || (a.gain == b.gain && a.feature < b.feature);
            });
  const Candidate& best = per_feature[0];
  const double second = per_feature.size() > 1 ? per_feature[1].gain : 0.0;
  const double range = std::log2(static_cast<double>(classes_));
  const double eps = hoeffding_bound(range, params_.delta, node.weight);
  if (best.gain <= 1e-12 || !(best.gain - second > eps || eps < params_.tie_threshold)) return;

  Node left = make_leaf(best.left);
  Node right = make_leaf(node.class_counts - best.left);
  const int left_index = static_cast<int>(nodes_.size());
  Node& parent = nodes_[static_cast<std::size_t>(leaf_index)];
  parent.leaf = false;
  parent.feature = best.feature;
  parent.threshold = best.threshold;
  parent.left = left_index;
  parent.right = left_index + 1;
  parent.observers.clear();
  parent.observers.shrink_to_fit();
  nodes_.push_back(std::move(left));
  nodes_.push_back(std::move(right));
}

Prediction HoeffdingTree::predict(const Features& x) const {
  check_dim(x, dim_);
  return majority(nodes_[static_cast<std::size_t>(route(x))].class_counts);
}

Checkpoint HoeffdingTree::snapshot() const { return std::make_shared<const HoeffdingTree>(*this); }

std::size_t HoeffdingTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

double HoeffdingTree::total_leaf_weight() const {
  double total = 0.0;
  for (const Node& n : nodes_) {
    if (n.leaf) total += n.weight;
  }
  return total;
}

bool HoeffdingTree::leaf_counts_consistent() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) {
    return !n.leaf || std::abs(n.weight - n.class_counts.sum()) <= 1e-9 * std::max(1.0, n.weight);
  });
}

// ---------------------------------------------------------------------------
// SlidingKnn

SlidingKnn::SlidingKnn(int input_dim, int k, std::size_t window, int num_classes)
    : dim_(input_dim), k_(k), capacity_(window), classes_(num_classes) {
  if (input_dim <= 0 || k <= 0 || window == 0 || num_classes < 2) {
    throw std::invalid_argument("SlidingKnn: bad parameters");
  }
}

void SlidingKnn::learn_one(const LabeledExample& e) {
  check_dim(e.features, dim_);
  check_label(e.label, classes_);
  window_.push_back(e);
  while (window_.size() > capacity_) window_.pop_front();
}

void SlidingKnn::learn(std::span<const LabeledExample> batch) {
  for (const auto& e : batch) learn_one(e);
}

Prediction SlidingKnn::predict(const Features& x) const {
  check_dim(x, dim_);
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(classes_);
  if (window_.empty()) return {0, votes};

  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(window_.size());
  for (std::size_t i = 0; i < window_.size(); ++i) {
    dist.emplace_back((window_[i].features - x).squaredNorm(), i);
  }
  const auto k = std::min(static_cast<std::size_t>(k_), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  for (std::size_t i = 0; i < k; ++i) votes[window_[dist[i].second].label] += 1.0;
  return majority(votes);
}

Checkpoint SlidingKnn::snapshot() const { return std::make_shared<const SlidingKnn>(*this); }

// ---------------------------------------------------------------------------
// AdaptiveForest

AdaptiveForest::AdaptiveForest(int input_dim, std::uint64_t seed, AdaptiveForestParams params,
                               int num_classes)
    : dim_(input_dim), classes_(num_classes), params_(params), rng_(seed) {
  if (params.trees <= 0 || params.lambda < 0.0) {
    throw std::invalid_argument("AdaptiveForest: need at least one tree and lambda >= 0");
  }
  trees_.reserve(static_cast<std::size_t>(params.trees));
  for (int t = 0; t < params.trees; ++t) {
    trees_.emplace_back(dim_, classes_, params_.tree);
    detectors_.emplace_back(params_.detector_delta);
  }
}

int AdaptiveForest::draw_replication() {
  if (params_.lambda <= 0.0) return 0;
  return std::poisson_distribution<int>(params_.lambda)(rng_);
}

void AdaptiveForest::learn_one(const LabeledExample& e) {
  check_dim(e.features, dim_);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const bool error = trees_[t].predict(e.features).label != e.label;
    const int k = draw_replication();
    if (k > 0) trees_[t].learn_one(e, static_cast<double>(k));
    if (detectors_[t].insert(error ? 1.0 : 0.0)) {
      trees_[t] = HoeffdingTree(dim_, classes_, params_.tree);
      detectors_[t] = Adwin(params_.detector_delta);
      ++resets_;
    }
  }
}

void AdaptiveForest::learn(std::span<const LabeledExample> batch) {
  for (const auto& e : batch) learn_one(e);
}

Prediction AdaptiveForest::predict(const Features& x) const {
  check_dim(x, dim_);
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(classes_);
  for (const auto& tree : trees_) votes[tree.predict(x).label] += 1.0;
  return majority(votes);
}

Checkpoint AdaptiveForest::snapshot() const { return std::make_shared<const AdaptiveForest>(*this); }

}  // namespace sclbench
