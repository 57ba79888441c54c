#pragma once

#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

namespace sclbench {

/// Adaptive windowing over values in [0, 1], kept as an exponential histogram:
/// row r holds up to `max_buckets` buckets of 2^r items each.
class Adwin {
 public:
  struct Bucket {
    double sum = 0.0;
    double count = 0.0;
  };

  explicit Adwin(double delta = 0.002, int max_buckets = 5);

  /// Adds `x` and shrinks the window while some bucket boundary splits it into two
  /// sub-windows whose means differ by more than the cut threshold. Returns true if
  /// anything was dropped.
  bool insert(double x);

  /// Mean and length of the retained window. Throws EmptyWindow before the first insertion.
  std::pair<double, double> estimate() const;

  double width() const { return count_; }
  double total() const { return sum_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t detections() const { return detections_; }
  double delta() const { return delta_; }

  /// Threshold on |mean difference| for sub-windows of `n0` and `n1` items out of `n`.
  static double cut_threshold(double n0, double n1, double n, double delta);

  /// Buckets from oldest to newest; for invariant checks.
  std::vector<Bucket> buckets_oldest_first() const;

 private:
  void compress();
  bool find_and_drop_cut();
  void drop_oldest();

  double delta_;
  std::size_t max_buckets_;
  // rows_[r].front() is the newest bucket of row r; higher rows are older.
  std::vector<std::deque<Bucket>> rows_;
  double sum_ = 0.0;
  double count_ = 0.0;
  std::size_t detections_ = 0;
};

enum class DriftLevel { normal, warning, drift };

/// DDM error-rate monitor. Levels: warning once p + s > p_min + 2 s_min, drift once
/// p + s > p_min + 3 s_min; a drift resets every statistic.
class Ddm {
 public:
  explicit Ddm(int min_instances = 30, double warning_level = 2.0, double drift_level = 3.0);

  DriftLevel update(bool error);

  double error_rate() const { return p_; }
  double std_dev() const { return s_; }
  double p_min() const { return p_min_; }
  double s_min() const { return s_min_; }
  double samples() const { return n_; }

 private:
  void reset();

  int min_instances_;
  double warning_level_;
  double drift_level_;
  double n_ = 0.0;
  double errors_ = 0.0;
  double p_ = 0.0;
  double s_ = 0.0;
  double p_min_;
  double s_min_;
};

}  // namespace sclbench
