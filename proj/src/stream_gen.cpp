#include "sclbench/stream_gen.hpp"

#include "sclbench/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace sclbench {

namespace {

constexpr std::array<SegmentVector, kDigitCount> kSegments = {{
    {1, 1, 1, 1, 1, 1, 0},  // 0
    {0, 1, 1, 0, 0, 0, 0},  // 1
    {1, 1, 0, 1, 1, 0, 1},  // 2
    {1, 1, 1, 1, 0, 0, 1},  // 3
    {0, 1, 1, 0, 0, 1, 1},  // 4
    {1, 0, 1, 1, 0, 1, 1},  // 5
    {1, 0, 1, 1, 1, 1, 1},  // 6
    {1, 1, 1, 0, 0, 0, 0},  // 7
    {1, 1, 1, 1, 1, 1, 1},  // 8
    {1, 1, 1, 1, 0, 1, 1},  // 9
}};

void check_digit(int digit) {
  if (digit < 0 || digit >= kDigitCount) {
    throw std::invalid_argument("digit out of range: " + std::to_string(digit));
  }
}

Concept make_concept(const std::vector<int>& digits, const std::array<int, kDigitCount>& labels,
                     int concept_id, int train_count, int test_count, double noise_p, Rng& rng) {
  Concept c;
  c.digits = digits;
  c.digit_labels = labels;
  std::uniform_int_distribution<std::size_t> pick(0, digits.size() - 1);
  auto draw = [&](int count, ExampleSet& out) {
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int digit = digits[pick(rng)];
      out.push_back({sample_example(digit, noise_p, rng), labels[static_cast<std::size_t>(digit)],
                     concept_id});
    }
  };
  draw(train_count, c.train);
  draw(test_count, c.test);
  return c;
}

std::vector<std::int64_t> cumulative_boundaries(const std::vector<Concept>& concepts) {
  std::vector<std::int64_t> boundaries;
  std::int64_t total = 0;
  for (std::size_t i = 0; i + 1 < concepts.size(); ++i) {
    total += static_cast<std::int64_t>(concepts[i].train.size());
    boundaries.push_back(total);
  }
  return boundaries;
}

void check_counts(int examples_per_concept, int test_per_concept, double noise_p) {
  if (examples_per_concept <= 0 || test_per_concept <= 0) {
    throw std::invalid_argument("example counts must be positive");
  }
  if (!(noise_p >= 0.0 && noise_p < 0.5)) {
    throw std::invalid_argument("noise_p must lie in [0, 0.5)");
  }
}

}  // namespace

SegmentVector digit_segments(int digit) {
  check_digit(digit);
  return kSegments[static_cast<std::size_t>(digit)];
}

Features sample_example(int digit, double noise_p, Rng& rng) {
  const SegmentVector bits = digit_segments(digit);
  Features x(kSegmentCount);
  std::bernoulli_distribution flip(noise_p);
  for (int i = 0; i < kSegmentCount; ++i) {
    const bool on = bits[static_cast<std::size_t>(i)] != 0;
    x[i] = (noise_p > 0.0 && flip(rng)) ? (on ? 0.0 : 1.0) : (on ? 1.0 : 0.0);
  }
  return x;
}

TaskSpec::TaskSpec(int task_id, std::string task_name, std::initializer_list<int> positive_digits)
    : id(task_id), name(std::move(task_name)) {
  for (int d : positive_digits) {
    check_digit(d);
    positives.set(static_cast<std::size_t>(d));
  }
  if (positives.none() || positives.all()) {
    throw std::invalid_argument("task positive set must be a proper non-empty subset of digits");
  }
}

const std::array<TaskSpec, 5>& builtin_tasks() {
  static const std::array<TaskSpec, 5> tasks = {
      TaskSpec{0, "parity", {1, 3, 5, 7, 9}},
      TaskSpec{1, "greater-than-4", {5, 6, 7, 8, 9}},
      TaskSpec{2, "multiple-of-3", {0, 3, 6, 9}},
      TaskSpec{3, "prime-including-one", {1, 2, 3, 5, 7}},
      TaskSpec{4, "range-2-5", {2, 3, 4, 5}},
  };
  return tasks;
}

int task_label(const TaskSpec& task, int digit) {
  check_digit(digit);
  return task.positives.test(static_cast<std::size_t>(digit)) ? 1 : 0;
}

// ---------------------------------------------------------------------------

DriftSchedule DriftSchedule::abrupt(std::vector<std::int64_t> b) {
  DriftSchedule s;
  s.boundaries = std::move(b);
  return s;
}

DriftSchedule DriftSchedule::gradual(std::vector<std::int64_t> b, std::int64_t w) {
  DriftSchedule s = abrupt(std::move(b));
  s.speed = DriftSpeed::gradual;
  s.width = w;
  return s;
}

DriftSchedule DriftSchedule::incremental(std::vector<std::int64_t> b, std::int64_t w, int n) {
  DriftSchedule s = abrupt(std::move(b));
  s.speed = DriftSpeed::incremental;
  s.width = w;
  s.stages = n;
  return s;
}

DriftSchedule DriftSchedule::recurring(std::vector<std::int64_t> b, std::vector<int> c) {
  DriftSchedule s = abrupt(std::move(b));
  s.speed = DriftSpeed::recurring;
  s.cycle = std::move(c);
  return s;
}

void DriftSchedule::validate(int num_concepts) const {
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (boundaries[i] <= 0 || (i > 0 && boundaries[i] <= boundaries[i - 1])) {
      throw std::invalid_argument("drift boundaries must be positive and strictly increasing");
    }
  }
  switch (speed) {
    case DriftSpeed::abrupt:
      break;
    case DriftSpeed::gradual:
      if (width <= 0) throw std::invalid_argument("gradual drift width must be positive");
      break;
    case DriftSpeed::incremental:
      if (width <= 0 || stages <= 0) {
        throw std::invalid_argument("incremental drift needs positive width and stages");
      }
      break;
    case DriftSpeed::recurring:
      if (cycle.empty()) throw std::invalid_argument("recurring drift needs a cycle");
      for (int c : cycle) {
        if (c < 0 || c >= num_concepts) {
          throw std::invalid_argument("recurring cycle references unknown concept");
        }
      }
      break;
  }
}

std::size_t DriftSchedule::segment_at(std::int64_t step) const {
  return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), step) -
                                  boundaries.begin());
}

int DriftSchedule::segment_concept(std::size_t segment) const {
  if (speed == DriftSpeed::recurring) return cycle[segment % cycle.size()];
  return static_cast<int>(segment);
}

int next_concept_index(const DriftSchedule& schedule, std::int64_t step, Rng& rng) {
  if (step < 0) throw std::invalid_argument("step must be non-negative");
  const std::size_t segment = schedule.segment_at(step);
  const int current = schedule.segment_concept(segment);
  if (segment == 0) return current;
  const std::int64_t since = step - schedule.boundaries[segment - 1];
  switch (schedule.speed) {
    case DriftSpeed::gradual:
      if (since < schedule.width) {
        const double p_old = 1.0 - static_cast<double>(since) / static_cast<double>(schedule.width);
        if (std::bernoulli_distribution(p_old)(rng)) return schedule.segment_concept(segment - 1);
      }
      return current;
    case DriftSpeed::incremental:
      return incremental_weight(schedule, step) < 0.5 ? schedule.segment_concept(segment - 1)
                                                      : current;
    default:
      return current;
  }
}

double incremental_weight(const DriftSchedule& schedule, std::int64_t step) {
  const std::size_t segment = schedule.segment_at(step);
  if (schedule.speed != DriftSpeed::incremental || segment == 0) return segment == 0 ? 0.0 : 1.0;
  const std::int64_t since = step - schedule.boundaries[segment - 1];
  if (since >= schedule.width) return 1.0;
  // stage k of `stages` covers [k*w/stages, (k+1)*w/stages) and mixes in (k+1)/(stages+1)
  const auto stage = since * schedule.stages / schedule.width;
  return static_cast<double>(stage + 1) / static_cast<double>(schedule.stages + 1);
}

// ---------------------------------------------------------------------------

void validate_scenario(const Scenario& s) {
  if (s.concepts.empty()) throw SchemaError("scenario has no concepts");
  if (s.feature_dim <= 0) throw SchemaError("scenario feature dimension must be positive");
  try {
    s.schedule.validate(static_cast<int>(s.concepts.size()));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  if (s.drift_kinds.size() != s.schedule.boundaries.size()) {
    throw SchemaError("one drift kind is required per boundary");
  }
  for (const Concept& c : s.concepts) {
    if (c.test.empty()) throw SchemaError("every concept needs a non-empty test set");
    for (const ExampleSet* set : {&c.train, &c.test}) {
      for (const LabeledExample& e : *set) {
        if (e.features.size() != s.feature_dim) throw SchemaError("inconsistent feature dimension");
      }
    }
  }
  for (std::size_t b = 0; b < s.drift_kinds.size(); ++b) {
    const Concept& before = s.concepts[static_cast<std::size_t>(s.schedule.segment_concept(b))];
    const Concept& after = s.concepts[static_cast<std::size_t>(s.schedule.segment_concept(b + 1))];
    if (s.drift_kinds[b] == DriftKind::unspecified) continue;
    if (!before.digit_labels || !after.digit_labels) {
      throw SchemaError("drift kind tags require per-concept label maps");
    }
    bool flipped = false;
    for (std::size_t d = 0; d < kDigitCount; ++d) {
      flipped = flipped || (*before.digit_labels)[d] != (*after.digit_labels)[d];
    }
    if (s.drift_kinds[b] == DriftKind::virtual_drift && flipped) {
      throw SchemaError("virtual drift changes a digit's label");
    }
    if (s.drift_kinds[b] == DriftKind::real && !flipped) {
      throw SchemaError("real drift leaves every label unchanged");
    }
  }
}

Scenario build_virtual_scenario(std::uint64_t seed, int examples_per_concept, int test_per_concept,
                                double noise_p) {
  check_counts(examples_per_concept, test_per_concept, noise_p);
  Rng rng(seed);
  std::vector<int> odd{1, 3, 5, 7, 9};
  std::vector<int> even{0, 2, 4, 6, 8};
  std::shuffle(odd.begin(), odd.end(), rng);
  std::shuffle(even.begin(), even.end(), rng);

  std::array<int, kDigitCount> parity{};
  for (int d = 0; d < kDigitCount; ++d) parity[static_cast<std::size_t>(d)] = d % 2;

  Scenario s;
  s.name = "virtual";
  s.seed = seed;
  s.feature_dim = kSegmentCount;
  for (std::size_t i = 0; i < odd.size(); ++i) {
    s.concepts.push_back(make_concept({odd[i], even[i]}, parity, static_cast<int>(i),
                                      examples_per_concept, test_per_concept, noise_p, rng));
  }
  s.schedule = DriftSchedule::abrupt(cumulative_boundaries(s.concepts));
  s.drift_kinds.assign(s.schedule.boundaries.size(), DriftKind::virtual_drift);
  return s;
}

Scenario build_real_scenario(std::uint64_t seed, int examples_per_concept, int test_per_concept,
                             double noise_p, const std::vector<int>& task_order) {
  check_counts(examples_per_concept, test_per_concept, noise_p);
  const auto& tasks = builtin_tasks();
  std::vector<int> sorted = task_order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> identity(tasks.size());
  std::iota(identity.begin(), identity.end(), 0);
  if (sorted != identity) {
    throw std::invalid_argument("task order must be a permutation of the five built-in tasks");
  }

  Rng rng(seed);
  std::vector<int> all_digits(kDigitCount);
  std::iota(all_digits.begin(), all_digits.end(), 0);

  Scenario s;
  s.name = "real";
  s.seed = seed;
  s.feature_dim = kSegmentCount;
  for (std::size_t i = 0; i < task_order.size(); ++i) {
    const TaskSpec& task = tasks[static_cast<std::size_t>(task_order[i])];
    std::array<int, kDigitCount> labels{};
    for (int d = 0; d < kDigitCount; ++d) labels[static_cast<std::size_t>(d)] = task_label(task, d);
    s.concepts.push_back(make_concept(all_digits, labels, static_cast<int>(i), examples_per_concept,
                                      test_per_concept, noise_p, rng));
  }
  s.schedule = DriftSchedule::abrupt(cumulative_boundaries(s.concepts));
  s.drift_kinds.assign(s.schedule.boundaries.size(), DriftKind::real);
  return s;
}

Stream materialize_stream(const Scenario& scenario, std::uint64_t seed) {
  Stream out;
  const DriftSchedule& schedule = scenario.schedule;
  out.boundaries = schedule.boundaries;
  for (std::size_t seg = 0; seg <= schedule.boundaries.size(); ++seg) {
    out.segment_concepts.push_back(schedule.segment_concept(seg));
  }

  std::size_t total = 0;
  for (const Concept& c : scenario.concepts) total += c.train.size();

  if (schedule.speed == DriftSpeed::abrupt) {
    out.examples.reserve(total);
    for (const Concept& c : scenario.concepts) {
      out.examples.insert(out.examples.end(), c.train.begin(), c.train.end());
    }
    return out;
  }

  Rng rng(seed);
  std::vector<std::size_t> cursor(scenario.concepts.size(), 0);
  auto take = [&](int concept_id) -> const LabeledExample& {
    const ExampleSet& pool = scenario.concepts[static_cast<std::size_t>(concept_id)].train;
    if (pool.empty()) throw SchemaError("concept selected by schedule has no training data");
    std::size_t& at = cursor[static_cast<std::size_t>(concept_id)];
    const LabeledExample& e = pool[at % pool.size()];
    ++at;
    return e;
  };

  out.examples.reserve(total);
  for (std::size_t step = 0; step < total; ++step) {
    const auto t = static_cast<std::int64_t>(step);
    if (schedule.speed == DriftSpeed::incremental) {
      const std::size_t seg = schedule.segment_at(t);
      const double w = incremental_weight(schedule, t);
      if (seg == 0 || w >= 1.0) {
        out.examples.push_back(take(schedule.segment_concept(seg)));
        continue;
      }
      const LabeledExample& from = take(schedule.segment_concept(seg - 1));
      const LabeledExample& to = take(schedule.segment_concept(seg));
      LabeledExample blended = w < 0.5 ? from : to;
      blended.features = (1.0 - w) * from.features + w * to.features;
      out.examples.push_back(std::move(blended));
    } else {
      out.examples.push_back(take(next_concept_index(schedule, t, rng)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line, const char* what) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  T value{};
  if (!(in >> value) || !(in >> std::ws).eof()) {
    throw ParseError(line, std::string("non-numeric ") + what + " '" + text + "'");
  }
  return value;
}

}  // namespace

Scenario load_csv_scenario(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  int dim = -1;
  std::map<int, Concept> concepts;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (dim < 0) {
      if (cells.size() < 4 || cells[cells.size() - 3] != "label" ||
          cells[cells.size() - 2] != "concept" || cells.back() != "split") {
        throw ParseError(line_no, "header must be f0,...,f{d-1},label,concept,split");
      }
      dim = static_cast<int>(cells.size()) - 3;
      for (int i = 0; i < dim; ++i) {
        if (cells[static_cast<std::size_t>(i)] != "f" + std::to_string(i)) {
          throw ParseError(line_no, "unexpected feature column '" + cells[static_cast<std::size_t>(i)] + "'");
        }
      }
      if (schema.feature_dim && *schema.feature_dim != dim) {
        throw SchemaError("expected " + std::to_string(*schema.feature_dim) + " features, file has " +
                          std::to_string(dim));
      }
      continue;
    }
    if (static_cast<int>(cells.size()) != dim + 3) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " features, found " + std::to_string(static_cast<int>(cells.size()) - 3));
    }
    LabeledExample e;
    e.features.resize(dim);
    for (int i = 0; i < dim; ++i) {
      e.features[i] = parse_number<double>(cells[static_cast<std::size_t>(i)], line_no, "feature");
    }
    e.label = parse_number<int>(cells[static_cast<std::size_t>(dim)], line_no, "label");
    e.concept_id = parse_number<int>(cells[static_cast<std::size_t>(dim) + 1], line_no, "concept");
    if (e.label < 0) throw ParseError(line_no, "negative label");
    if (e.concept_id < 0) throw ParseError(line_no, "negative concept index");
    const std::string& split = cells.back();
    Concept& c = concepts[e.concept_id];
    if (split == "train") {
      c.train.push_back(std::move(e));
    } else if (split == "test") {
      c.test.push_back(std::move(e));
    } else {
      throw ParseError(line_no, "split must be 'train' or 'test', got '" + split + "'");
    }
  }
  if (dim < 0) throw ParseError(line_no, "missing header");

  Scenario s;
  s.name = path.stem().string();
  s.feature_dim = dim;
  int expected = 0;
  for (auto& [id, c] : concepts) {
    if (id != expected++) throw SchemaError("concept indices must be contiguous from 0");
    s.concepts.push_back(std::move(c));
  }
  for (const Concept& c : s.concepts) {
    if (c.train.empty()) throw SchemaError("concept without training rows");
  }
  s.schedule = DriftSchedule::abrupt(cumulative_boundaries(s.concepts));
  s.drift_kinds.assign(s.schedule.boundaries.size(), DriftKind::unspecified);
  validate_scenario(s);
  return s;
}

void write_csv_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (int i = 0; i < scenario.feature_dim; ++i) out << 'f' << i << ',';
  out << "label,concept,split\n";
  char buf[32];
  auto rows = [&](const ExampleSet& set, const char* split) {
    for (const LabeledExample& e : set) {
      for (Eigen::Index i = 0; i < e.features.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", e.features[i]);
        out << buf << ',';
      }
      out << e.label << ',' << e.concept_id << ',' << split << '\n';
    }
  };
  for (const Concept& c : scenario.concepts) rows(c.train, "train");
  for (const Concept& c : scenario.concepts) rows(c.test, "test");
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace sclbench
