#pragma once

#include "sclbench/errors.hpp"
#include "sclbench/learner.hpp"
#include "sclbench/stream_gen.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

namespace sclbench {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  using Counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

  explicit ConfusionMatrix(int classes = 2) : counts_(Counts::Zero(classes, classes)) {}
  explicit ConfusionMatrix(Counts counts);

  void add(int truth, int predicted, std::int64_t n = 1);
  void remove(int truth, int predicted) { add(truth, predicted, -1); }
  void clear() { counts_.setZero(); }

  std::int64_t total() const { return counts_.sum(); }
  int classes() const { return static_cast<int>(counts_.rows()); }
  const Counts& counts() const { return counts_; }

 private:
  Counts counts_;
};

/// Cohen's kappa (p_o - p_e) / (1 - p_e); 0 when p_e = 1. Throws UndefinedMetric when empty.
double kappa(const ConfusionMatrix& confusion);

/// Fraction of the diagonal. Throws UndefinedMetric when empty.
double accuracy(const ConfusionMatrix& confusion);

/// FIFO of the most recent (truth, prediction) pairs, cleared at drift boundaries.
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity = 1000, int classes = 2);

  /// Clears first when `drift_boundary`, then inserts; returns kappa over the contents.
  double update(int truth, int predicted, bool drift_boundary = false);
  void reset();

  std::size_t size() const { return pairs_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<std::pair<int, int>>& contents() const { return pairs_; }
  const ConfusionMatrix& confusion() const { return confusion_; }
  double kappa() const { return sclbench::kappa(confusion_); }

 private:
  std::size_t capacity_;
  std::deque<std::pair<int, int>> pairs_;
  ConfusionMatrix confusion_;
};

struct TraceRecord {
  std::int64_t step = 0;
  int concept_id = 0;
  int truth = 0;
  int predicted = 0;
  double kappa = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct PrequentialTrace {
  std::vector<TraceRecord> records;
  std::vector<std::int64_t> boundaries;  ///< steps at which the window was reset

  friend bool operator==(const PrequentialTrace&, const PrequentialTrace&) = default;
};

enum class BoundaryMode {
  known,     ///< reset at the scenario's concept boundaries
  detected,  ///< reset when an ADWIN monitor on the prequential error fires
};

struct PrequentialOptions {
  std::size_t batch_size = 1;
  std::size_t window = 1000;
  int classes = 2;
  BoundaryMode boundaries = BoundaryMode::known;
  double detector_delta = 0.002;
  std::uint64_t stream_seed = 0;  ///< only used by non-abrupt schedules
};

struct PrequentialResult {
  PrequentialTrace trace;
  std::vector<Checkpoint> checkpoints;  ///< one per segment, taken after its last example
  std::vector<int> segment_concepts;    ///< concept index owning each checkpoint's segment
};

/// Test-then-train over the scenario stream. Each minibatch is predicted in full with the
/// current model, then learned in one call. Minibatches never straddle a segment boundary.
PrequentialResult prequential_run(const Scenario& scenario, Learner& learner,
                                  const PrequentialOptions& options = {});

enum class Metric { kappa, accuracy };

/// Lower-triangular score matrix: entry (i, j) = metric of checkpoint i on test set j, j <= i.
/// Upper-triangle entries are NaN.
Eigen::MatrixXd cl_matrix(const std::vector<Checkpoint>& checkpoints,
                          const std::vector<const ExampleSet*>& test_sets,
                          Metric metric = Metric::kappa, int classes = 2);

/// Test sets in checkpoint order for a prequential result on `scenario`.
std::vector<const ExampleSet*> segment_test_sets(const Scenario& scenario,
                                                 const std::vector<int>& segment_concepts);

namespace detail {
template <typename Derived>
void require_lower(const Eigen::MatrixBase<Derived>& m, Eigen::Index n) {
  if (n < 1 || m.rows() < n || m.cols() < n) throw std::invalid_argument("score matrix smaller than N");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      if (!std::isfinite(static_cast<double>(m(i, j)))) {
        throw std::invalid_argument("score matrix incomplete at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      }
}
}  // namespace detail

/// Mean of the lower triangle (diagonal included) of the leading N x N block.
template <typename Derived>
double k_avg(const Eigen::MatrixBase<Derived>& k, Eigen::Index n) {
  detail::require_lower(k, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += k.row(i).head(i + 1).sum();
  return total / (static_cast<double>(n * (n + 1)) / 2.0);
}

/// Mean of K(i, j) - K(j, j) over the strict lower triangle. Needs N >= 2.
template <typename Derived>
double bwt(const Eigen::MatrixBase<Derived>& k, Eigen::Index n) {
  if (n < 2) throw UndefinedMetric("BWT needs at least two experiences");
  detail::require_lower(k, n);
  double total = 0.0;
  for (Eigen::Index i = 1; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) total += k(i, j) - k(j, j);
  return total / (static_cast<double>(n * (n - 1)) / 2.0);
}

/// Mean of the final checkpoint's row (checkpoint-major convention).
template <typename Derived>
double acc_final(const Eigen::MatrixBase<Derived>& a, Eigen::Index n) {
  if (n < 1 || a.rows() < n || a.cols() < n) throw std::invalid_argument("score matrix smaller than N");
  if (!a.row(n - 1).head(n).allFinite()) throw std::invalid_argument("final row incomplete");
  return a.row(n - 1).head(n).mean();
}

/// Mean over steps of the running cumulative accuracy.
double anytime_accuracy(const PrequentialTrace& trace);

}  // namespace sclbench
