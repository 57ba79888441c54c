#include "sclbench/grid.hpp"

#include "sclbench/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <thread>

namespace sclbench {

namespace {

constexpr std::uint64_t kScenarioStream = 0x5ce7a210ULL;
constexpr std::uint64_t kTaskOrderStream = 0x7a5c0bdeULL;
constexpr std::uint64_t kStreamOrder = 0x0b5e55edULL;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t scenario_seed(std::uint64_t master_seed, std::uint64_t seed) {
  return derive_seed(master_seed, kScenarioStream, seed);
}

std::uint64_t learner_seed(std::uint64_t master_seed, const std::string& strategy,
                           std::size_t seed_index) {
  return derive_seed(master_seed, fnv1a(strategy), seed_index);
}

Scenario build_scenario(const ScenarioConfig& c, std::uint64_t master_seed, std::uint64_t seed) {
  const std::uint64_t s = scenario_seed(master_seed, seed);
  if (c.kind == "virtual") {
    return build_virtual_scenario(s, c.examples_per_concept, c.test_per_concept, c.noise);
  }
  if (c.kind == "real") {
    std::vector<int> order{0, 1, 2, 3, 4};
    if (c.task_order) {
      order = *c.task_order;
    } else {
      Rng rng(derive_seed(s, kTaskOrderStream));
      std::shuffle(order.begin(), order.end(), rng);
    }
    return build_real_scenario(s, c.examples_per_concept, c.test_per_concept, c.noise, order);
  }
  if (c.kind == "csv") return load_csv_scenario(c.path);
  throw std::invalid_argument("unknown scenario kind '" + c.kind + "'");
}

RunResult run_cell(const ExperimentConfig& config, const Scenario& scenario,
                   const StrategyConfig& strategy, std::size_t seed_index,
                   std::uint64_t master_seed) {
  RunResult r;
  r.strategy = strategy.name;
  r.scenario = config.scenario.kind;
  r.seed_index = seed_index;
  r.seed = config.scenario.seeds.at(seed_index);
  try {
    auto learner = make_learner(strategy, scenario.feature_dim,
                                learner_seed(master_seed, strategy.name, seed_index));
    PrequentialOptions options;
    options.batch_size = is_neural(strategy.kind) ? config.evaluation.neural_batch
                                                  : config.evaluation.classical_batch;
    options.window = config.evaluation.window;
    options.boundaries = config.evaluation.boundaries;
    options.stream_seed = derive_seed(scenario.seed, kStreamOrder);

    PrequentialResult pr = prequential_run(scenario, *learner, options);
    r.trace = std::move(pr.trace);
    r.drift_boundaries = scenario.schedule.boundaries;
    r.kappa_matrix = cl_matrix(pr.checkpoints, segment_test_sets(scenario, pr.segment_concepts));
    const auto n = r.kappa_matrix.rows();
    r.k_avg = k_avg(r.kappa_matrix, n);
    r.bwt = n >= 2 ? bwt(r.kappa_matrix, n) : std::numeric_limits<double>::quiet_NaN();
    r.aaa = anytime_accuracy(r.trace);
    r.ok = true;
  } catch (const std::exception& e) {
    r = RunResult{r.strategy, r.scenario, r.seed_index, r.seed, false, e.what(), {}, {}, {}, 0, 0, 0};
  }
  return r;
}

std::vector<RunResult> run_grid(const ExperimentConfig& config, std::size_t jobs,
                                std::uint64_t master_seed, const std::filesystem::path& out_dir) {
  const auto& seeds = config.scenario.seeds;
  std::vector<std::optional<Scenario>> scenarios(seeds.size());
  std::vector<std::string> scenario_errors(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    try {
      scenarios[i] = build_scenario(config.scenario, master_seed, seeds[i]);
    } catch (const std::exception& e) {
      scenario_errors[i] = e.what();
    }
  }

  const std::size_t cells = config.strategies.size() * seeds.size();
  std::vector<RunResult> results(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      const StrategyConfig& strategy = config.strategies[cell / seeds.size()];
      const std::size_t seed_index = cell % seeds.size();
      RunResult& r = results[cell];
      if (!scenarios[seed_index]) {
        r.strategy = strategy.name;
        r.scenario = config.scenario.kind;
        r.seed_index = seed_index;
        r.seed = seeds[seed_index];
        r.error = "scenario construction failed: " + scenario_errors[seed_index];
        continue;
      }
      r = run_cell(config, *scenarios[seed_index], strategy, seed_index, master_seed);
      if (r.ok && !out_dir.empty()) {
        try {
          write_run_files(r, out_dir);
        } catch (const std::exception& e) {
          r.ok = false;
          r.error = std::string("writing run files failed: ") + e.what();
        }
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(cells, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

// ---------------------------------------------------------------------------

MetricSummary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::runtime_error("cannot summarize an empty set of runs");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::vector<SummaryRow> aggregate_runs(const std::vector<RunResult>& runs) {
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<const RunResult*>> groups;
  for (const RunResult& r : runs) {
    auto key = std::make_pair(r.strategy, r.scenario);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& key : keys) {
    std::vector<double> ka, bw, aa;
    for (const RunResult* r : groups[key]) {
      if (!r->ok) continue;
      ka.push_back(r->k_avg);
      bw.push_back(r->bwt);
      aa.push_back(r->aaa);
    }
    if (ka.empty()) {
      throw std::runtime_error("no successful run for " + key.first + " on " + key.second);
    }
    rows.push_back({key.first, key.second, ka.size(), summarize(ka), summarize(bw), summarize(aa)});
  }
  return rows;
}

}  // namespace sclbench
