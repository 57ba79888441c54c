#include "sclbench/drift.hpp"

#include "sclbench/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sclbench {

Adwin::Adwin(double delta, int max_buckets)
    : delta_(delta), max_buckets_(static_cast<std::size_t>(max_buckets)) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("ADWIN delta must be in (0, 1)");
  if (max_buckets < 2) throw std::invalid_argument("ADWIN needs at least two buckets per row");
}

double Adwin::cut_threshold(double n0, double n1, double n, double delta) {
  const double m = 1.0 / (1.0 / n0 + 1.0 / n1);
  const double delta_prime = delta / n;
  return std::sqrt(std::log(4.0 / delta_prime) / (2.0 * m));
}

bool Adwin::insert(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("ADWIN input must lie in [0, 1]");
  if (rows_.empty()) rows_.emplace_back();
  rows_.front().push_front({x, 1.0});
  sum_ += x;
  count_ += 1.0;
  compress();

  bool dropped = false;
  while (find_and_drop_cut()) dropped = true;
  if (dropped) ++detections_;
  return dropped;
}

void Adwin::compress() {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() <= max_buckets_) break;
    // merge the two oldest buckets of this row into one bucket of the next row
    Bucket a = rows_[r].back();
    rows_[r].pop_back();
    Bucket b = rows_[r].back();
    rows_[r].pop_back();
    if (r + 1 == rows_.size()) rows_.emplace_back();
    rows_[r + 1].push_front({a.sum + b.sum, a.count + b.count});
  }
}

bool Adwin::find_and_drop_cut() {
  if (count_ < 2.0) return false;
  double n0 = 0.0;
  double s0 = 0.0;
  // walk from the oldest bucket; each bucket boundary is a candidate cut
  for (std::size_t r = rows_.size(); r-- > 0;) {
    const auto& row = rows_[r];
    for (std::size_t i = row.size(); i-- > 0;) {
      n0 += row[i].count;
      s0 += row[i].sum;
      const double n1 = count_ - n0;
      if (n1 <= 0.0) return false;
      const double diff = std::abs(s0 / n0 - (sum_ - s0) / n1);
      if (diff > cut_threshold(n0, n1, count_, delta_)) {
        drop_oldest();
        return true;
      }
    }
  }
  return false;
}

void Adwin::drop_oldest() {
  auto& row = rows_.back();
  sum_ -= row.back().sum;
  count_ -= row.back().count;
  row.pop_back();
  while (!rows_.empty() && rows_.back().empty()) rows_.pop_back();
}

std::pair<double, double> Adwin::estimate() const {
  if (count_ <= 0.0) throw EmptyWindow("ADWIN window is empty");
  return {sum_ / count_, count_};
}

std::vector<Adwin::Bucket> Adwin::buckets_oldest_first() const {
  std::vector<Bucket> out;
  for (std::size_t r = rows_.size(); r-- > 0;) {
    for (std::size_t i = rows_[r].size(); i-- > 0;) out.push_back(rows_[r][i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

Ddm::Ddm(int min_instances, double warning_level, double drift_level)
    : min_instances_(min_instances), warning_level_(warning_level), drift_level_(drift_level) {
  reset();
}

void Ddm::reset() {
  n_ = 0.0;
  errors_ = 0.0;
  p_ = 0.0;
  s_ = 0.0;
  p_min_ = std::numeric_limits<double>::infinity();
  s_min_ = std::numeric_limits<double>::infinity();
}

DriftLevel Ddm::update(bool error) {
  n_ += 1.0;
  errors_ += error ? 1.0 : 0.0;
  p_ = errors_ / n_;
  s_ = std::sqrt(p_ * (1.0 - p_) / n_);
  if (n_ < min_instances_) return DriftLevel::normal;

  if (p_ + s_ < p_min_ + s_min_) {
    p_min_ = p_;
    s_min_ = s_;
  }
  if (p_ + s_ > p_min_ + drift_level_ * s_min_) {
    reset();
    return DriftLevel::drift;
  }
  if (p_ + s_ > p_min_ + warning_level_ * s_min_) return DriftLevel::warning;
  return DriftLevel::normal;
}

}  // namespace sclbench
