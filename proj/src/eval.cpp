#include "sclbench/eval.hpp"

#include "sclbench/drift.hpp"

#include <algorithm>
#include <cmath>

namespace sclbench {

ConfusionMatrix::ConfusionMatrix(Counts counts) : counts_(std::move(counts)) {
  if (counts_.rows() != counts_.cols() || counts_.rows() < 1) {
    throw std::invalid_argument("confusion matrix must be square");
  }
  if ((counts_.array() < 0).any()) throw std::invalid_argument("negative confusion count");
}

void ConfusionMatrix::add(int truth, int predicted, std::int64_t n) {
  if (truth < 0 || truth >= classes() || predicted < 0 || predicted >= classes()) {
    throw std::invalid_argument("class index outside confusion matrix");
  }
  counts_(truth, predicted) += n;
}

double kappa(const ConfusionMatrix& confusion) {
  const auto& c = confusion.counts();
  const double n = static_cast<double>(c.sum());
  if (n <= 0.0) throw UndefinedMetric("kappa of an empty confusion matrix");
  const Eigen::VectorXd rows = c.rowwise().sum().cast<double>() / n;
  const Eigen::VectorXd cols = c.colwise().sum().transpose().cast<double>() / n;
  const double p_o = static_cast<double>(c.diagonal().sum()) / n;
  const double p_e = rows.dot(cols);
  if (p_e >= 1.0) return 0.0;
  return std::clamp((p_o - p_e) / (1.0 - p_e), -1.0, 1.0);
}

double accuracy(const ConfusionMatrix& confusion) {
  const double n = static_cast<double>(confusion.total());
  if (n <= 0.0) throw UndefinedMetric("accuracy of an empty confusion matrix");
  return static_cast<double>(confusion.counts().diagonal().sum()) / n;
}

// ---------------------------------------------------------------------------

RollingWindow::RollingWindow(std::size_t capacity, int classes)
    : capacity_(capacity), confusion_(classes) {
  if (capacity == 0) throw std::invalid_argument("rolling window capacity must be positive");
}

void RollingWindow::reset() {
  pairs_.clear();
  confusion_.clear();
}

double RollingWindow::update(int truth, int predicted, bool drift_boundary) {
  if (drift_boundary) reset();
  confusion_.add(truth, predicted);
  pairs_.emplace_back(truth, predicted);
  while (pairs_.size() > capacity_) {
    confusion_.remove(pairs_.front().first, pairs_.front().second);
    pairs_.pop_front();
  }
  return kappa();
}

// ---------------------------------------------------------------------------

PrequentialResult prequential_run(const Scenario& scenario, Learner& learner,
                                  const PrequentialOptions& options) {
  if (options.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (learner.input_dim() != scenario.feature_dim) {
    throw std::invalid_argument("learner expects " + std::to_string(learner.input_dim()) +
                                " features, scenario has " + std::to_string(scenario.feature_dim));
  }
  const Stream stream = materialize_stream(scenario, options.stream_seed);

  PrequentialResult result;
  result.segment_concepts = stream.segment_concepts;
  result.trace.records.reserve(stream.examples.size());

  RollingWindow window(options.window, options.classes);
  Adwin monitor(options.detector_delta);

  const auto total = static_cast<std::int64_t>(stream.examples.size());
  std::size_t next_boundary = 0;
  std::int64_t step = 0;
  while (step < total) {
    std::int64_t segment_end = total;
    if (next_boundary < stream.boundaries.size()) {
      segment_end = std::min(total, stream.boundaries[next_boundary]);
    }
    const std::int64_t batch_end =
        std::min(segment_end, step + static_cast<std::int64_t>(options.batch_size));
    const std::span<const LabeledExample> batch(stream.examples.data() + step,
                                                static_cast<std::size_t>(batch_end - step));

    for (std::size_t k = 0; k < batch.size(); ++k) {
      const std::int64_t t = step + static_cast<std::int64_t>(k);
      const LabeledExample& e = batch[k];
      const int predicted = learner.predict(e.features).label;
      bool reset = false;
      if (options.boundaries == BoundaryMode::known) {
        reset = std::binary_search(stream.boundaries.begin(), stream.boundaries.end(), t);
      } else {
        reset = monitor.insert(predicted != e.label ? 1.0 : 0.0);
      }
      if (reset) result.trace.boundaries.push_back(t);
      const double k_now = window.update(e.label, predicted, reset);
      result.trace.records.push_back({t, e.concept_id, e.label, predicted, k_now});
    }
    learner.learn(batch);
    step = batch_end;

    if (step == segment_end) {
      result.checkpoints.push_back(learner.snapshot());
      if (segment_end != total) ++next_boundary;
    }
  }
  // segments with no examples (boundaries beyond the stream) still need a checkpoint
  while (result.checkpoints.size() < stream.segment_concepts.size()) {
    result.checkpoints.push_back(learner.snapshot());
  }
  return result;
}

std::vector<const ExampleSet*> segment_test_sets(const Scenario& scenario,
                                                 const std::vector<int>& segment_concepts) {
  std::vector<const ExampleSet*> sets;
  sets.reserve(segment_concepts.size());
  for (int c : segment_concepts) sets.push_back(&scenario.concepts.at(static_cast<std::size_t>(c)).test);
  return sets;
}

Eigen::MatrixXd cl_matrix(const std::vector<Checkpoint>& checkpoints,
                          const std::vector<const ExampleSet*>& test_sets, Metric metric,
                          int classes) {
  if (checkpoints.size() != test_sets.size()) {
    throw std::invalid_argument("cl_matrix: need one test set per checkpoint");
  }
  const auto n = static_cast<Eigen::Index>(checkpoints.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      ConfusionMatrix confusion(classes);
      for (const LabeledExample& e : *test_sets[static_cast<std::size_t>(j)]) {
        confusion.add(e.label, checkpoints[static_cast<std::size_t>(i)]->predict(e.features).label);
      }
      k(i, j) = metric == Metric::kappa ? kappa(confusion) : accuracy(confusion);
    }
  }
  return k;
}

double anytime_accuracy(const PrequentialTrace& trace) {
  if (trace.records.empty()) throw UndefinedMetric("anytime accuracy of an empty trace");
  double correct = 0.0;
  double running_sum = 0.0;
  for (std::size_t t = 0; t < trace.records.size(); ++t) {
    const auto& r = trace.records[t];
    correct += r.truth == r.predicted ? 1.0 : 0.0;
    running_sum += correct / static_cast<double>(t + 1);
  }
  return running_sum / static_cast<double>(trace.records.size());
}

}  // namespace sclbench
