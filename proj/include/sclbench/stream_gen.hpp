#pragma once

#include "sclbench/types.hpp"

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sclbench {

// ---------------------------------------------------------------------------
// Seven-segment digits
// ---------------------------------------------------------------------------

/// Segment bits x1..x7 in standard display order a..g
/// (a top, b upper right, c lower right, d bottom, e lower left, f upper left, g middle).
using SegmentVector = std::array<std::uint8_t, 7>;

inline constexpr int kSegmentCount = 7;
inline constexpr int kDigitCount = 10;

SegmentVector digit_segments(int digit);

/// Canonical encoding flipped bit-wise with probability `noise_p`, as real features.
Features sample_example(int digit, double noise_p, Rng& rng);

// ---------------------------------------------------------------------------
// Binary tasks over digits
// ---------------------------------------------------------------------------

struct TaskSpec {
  int id = 0;
  std::string name;
  std::bitset<kDigitCount> positives;

  TaskSpec(int id, std::string name, std::initializer_list<int> positive_digits);
};

/// parity, greater-than-4, multiple-of-3, prime-including-one, range-[2,5].
const std::array<TaskSpec, 5>& builtin_tasks();

int task_label(const TaskSpec& task, int digit);

// ---------------------------------------------------------------------------
// Drift schedules
// ---------------------------------------------------------------------------

enum class DriftSpeed { abrupt, gradual, incremental, recurring };

struct DriftSchedule {
  std::vector<std::int64_t> boundaries;
  DriftSpeed speed = DriftSpeed::abrupt;
  std::int64_t width = 0;  ///< transition length for gradual / incremental
  int stages = 0;          ///< number of intermediate steps for incremental
  std::vector<int> cycle;  ///< concept per segment for recurring

  static DriftSchedule abrupt(std::vector<std::int64_t> boundaries);
  static DriftSchedule gradual(std::vector<std::int64_t> boundaries, std::int64_t width);
  static DriftSchedule incremental(std::vector<std::int64_t> boundaries, std::int64_t width,
                                   int stages);
  static DriftSchedule recurring(std::vector<std::int64_t> boundaries, std::vector<int> cycle);

  /// Throws std::invalid_argument if the schedule is malformed for `num_concepts` concepts.
  void validate(int num_concepts) const;

  /// Segment index (count of boundaries <= step).
  std::size_t segment_at(std::int64_t step) const;
  /// Concept that owns a whole segment.
  int segment_concept(std::size_t segment) const;

  friend bool operator==(const DriftSchedule&, const DriftSchedule&) = default;
};

/// Concept active at `step`. Gradual transitions draw from `rng`; the other speeds are
/// deterministic. Incremental schedules return the dominant concept of the blend.
int next_concept_index(const DriftSchedule& schedule, std::int64_t step, Rng& rng);

/// Weight of the incoming concept at `step` for incremental schedules, quantized to
/// `stages` levels within the transition window. 0 outside transitions, 1 after them.
double incremental_weight(const DriftSchedule& schedule, std::int64_t step);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

enum class DriftKind { virtual_drift, real, unspecified };

struct Concept {
  ExampleSet train;
  ExampleSet test;
  std::vector<int> digits;                       ///< digits drawn in this concept (generated scenarios)
  std::optional<std::array<int, kDigitCount>> digit_labels;  ///< label map (generated scenarios)

  friend bool operator==(const Concept&, const Concept&) = default;
};

struct Scenario {
  std::string name;
  std::vector<Concept> concepts;
  DriftSchedule schedule;
  std::vector<DriftKind> drift_kinds;  ///< one per boundary
  int feature_dim = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Checks every structural invariant (dimensions, non-empty test sets, schedule, drift tags
/// against label maps). Throws SchemaError on violation.
void validate_scenario(const Scenario& scenario);

Scenario build_virtual_scenario(std::uint64_t seed, int examples_per_concept, int test_per_concept,
                                double noise_p);

/// `task_order` holds indices into builtin_tasks() and must be a permutation of 0..4.
Scenario build_real_scenario(std::uint64_t seed, int examples_per_concept, int test_per_concept,
                             double noise_p, const std::vector<int>& task_order);

/// The ordered training stream a learner sees, with the steps where segments change.
struct Stream {
  ExampleSet examples;
  std::vector<std::int64_t> boundaries;
  std::vector<int> segment_concepts;  ///< concept owning each segment, size boundaries+1
};

/// Replays the per-concept train sets according to the schedule. Abrupt schedules concatenate
/// and ignore `seed`; other speeds draw the next unread example of the selected concept
/// (wrapping around when a concept's pool is exhausted).
Stream materialize_stream(const Scenario& scenario, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// CSV scenarios: header f0,...,f{d-1},label,concept,split
// ---------------------------------------------------------------------------

struct CsvSchema {
  std::optional<int> feature_dim;  ///< enforce a dimension when set
};

Scenario load_csv_scenario(const std::filesystem::path& path, const CsvSchema& schema = {});
void write_csv_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace sclbench
