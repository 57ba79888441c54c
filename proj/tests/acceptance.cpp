// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"
#include "sclbench/classic.hpp"
#include "sclbench/config.hpp"
#include "sclbench/drift.hpp"
#include "sclbench/eval.hpp"
#include "sclbench/grid.hpp"
#include "sclbench/mlp.hpp"
#include "sclbench/ocl.hpp"
#include "sclbench/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace sclbench;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& check, double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("%s %s: %s | %s | %.2fs (budget %.0fs%s)\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(),
              secs, budget_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome metric_exactness() {
  ConfusionMatrix::Counts c(2, 2);
  c << 40, 10, 5, 45;
  const double k = kappa(ConfusionMatrix(c));
  Eigen::Matrix2d m;
  m << 0.9, std::nan(""), 0.5, 0.8;
  const double ka = k_avg(m, 2), b = bwt(m, 2);
  const double hb = hoeffding_bound(1.0, 1e-7, 1000);
  const Eigen::Vector2d proj = agem_project(Eigen::Vector2d(1, -1), Eigen::Vector2d(0, 1));
  const bool ok = std::abs(k - 0.7) <= 1e-9 && std::abs(ka - 2.2 / 3.0) <= 1e-9 && std::abs(b + 0.4) <= 1e-9 &&
                  std::abs(hb - 0.08980) <= 1e-4 && proj == Eigen::Vector2d(1, 0);
  return {ok, fmt("kappa=%.12f k_avg=%.12f bwt=%.12f hoeffding=%.6f agem=(%g,%g)", k, ka, b, hb, proj[0], proj[1])};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(2, seed));
    const auto p = MlpParams<double>::glorot(7, 8, 2, rng);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd x(7, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    std::vector<int> y;
    for (int j = 0; j < 5; ++j) y.push_back(static_cast<int>(rng() % 2));
    const Eigen::VectorXd a = mlp_backward(p, x, std::span<const int>(y)).first.flatten();
    const Eigen::VectorXd f = oracle::finite_difference_gradient(p, x, y, 1e-5);
    for (Eigen::Index i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(a[i] - f[i]) / std::max({std::abs(a[i]), std::abs(f[i]), 1e-7}));
  }
  return {worst <= 1e-4, fmt("max relative error %.3e over 10 nets", worst)};
}

// ---------------------------------------------------------------------------

struct ScenarioRuns {
  std::vector<RunResult> runs;
  std::map<std::string, SummaryRow> summary;
};

ScenarioRuns run_scenario(const std::string& kind) {
  const std::string text = "[scenario]\nkind = " + kind +
                           "\nseeds = 0, 1, 2, 3, 4, 5, 6, 7, 8, 9\nexamples_per_concept = 2000\n"
                           "test_per_concept = 500\nnoise = 0.05\n"
                           "[strategy.naive]\nkind = naive\n[strategy.er]\nkind = er\n"
                           "[strategy.agem]\nkind = agem\n[strategy.forest]\nkind = forest\n";
  ScenarioRuns out;
  out.runs = run_grid(parse_config_text(text), 1, 0);
  for (const auto& r : out.runs)
    if (!r.ok) throw std::runtime_error(r.strategy + " failed: " + r.error);
  for (auto& row : aggregate_runs(out.runs)) out.summary[row.strategy] = row;
  return out;
}

std::string table(const ScenarioRuns& s) {
  std::string t;
  for (const char* name : {"naive", "er", "agem", "forest"}) {
    const auto& r = s.summary.at(name);
    t += fmt("%s K_avg %.3f±%.3f BWT %.3f±%.3f; ", name, r.k_avg.mean, r.k_avg.std, r.bwt.mean, r.bwt.std);
  }
  return t;
}

Outcome virtual_direction(const ScenarioRuns& s) {
  const auto& n = s.summary.at("naive");
  const auto& e = s.summary.at("er");
  const auto& a = s.summary.at("agem");
  const bool c1 = e.bwt.mean >= n.bwt.mean + 0.3;
  const bool c2 = e.bwt.mean >= -0.25;
  const bool c3 = a.bwt.mean >= n.bwt.mean + 0.15;
  const bool c4 = e.k_avg.mean > a.k_avg.mean && a.k_avg.mean > n.k_avg.mean;
  return {c1 && c2 && c3 && c4,
          table(s) + fmt("ER-Naive BWT gap %.3f (need >= 0.3) %s; ER BWT >= -0.25 %s; AGEM-Naive gap %.3f (need >= 0.15) %s; "
                         "K_avg ER>AGEM>Naive %s; reference ER BWT -0.04, Naive BWT -0.77",
                         e.bwt.mean - n.bwt.mean, c1 ? "ok" : "MISS", c2 ? "ok" : "MISS", a.bwt.mean - n.bwt.mean,
                         c3 ? "ok" : "MISS", c4 ? "ok" : "MISS")};
}

Outcome real_direction(const ScenarioRuns& s) {
  bool all_bwt = true;
  std::string misses;
  for (const char* name : {"naive", "er", "agem", "forest"}) {
    if (s.summary.at(name).bwt.mean > -0.4) {
      all_bwt = false;
      misses += std::string(misses.empty() ? "" : ",") + name;
    }
  }
  const double gap = std::abs(s.summary.at("agem").k_avg.mean - s.summary.at("naive").k_avg.mean);
  const bool c2 = gap <= 0.10;
  const bool c3 = s.summary.at("forest").bwt.mean <= -0.5;
  return {all_bwt && c2 && c3,
          table(s) + fmt("all BWT <= -0.4 %s%s; |K_avg(AGEM)-K_avg(Naive)| %.3f (need <= 0.10) %s; forest BWT <= -0.5 %s; "
                         "reference K_avg 0.24-0.27, BWT <= -0.85",
                         all_bwt ? "ok" : "MISS: ", misses.c_str(), gap, c2 ? "ok" : "MISS", c3 ? "ok" : "MISS")};
}

// Kappa of the forest's predictions over the final 500 steps of each concept; worst concept per seed.
std::vector<double> forest_tail_kappa(const ScenarioRuns& s) {
  std::vector<double> per_seed;
  for (const auto& r : s.runs) {
    if (r.strategy != "forest") continue;
    std::vector<std::int64_t> ends = r.drift_boundaries;
    ends.push_back(static_cast<std::int64_t>(r.trace.records.size()));
    double worst = 1.0;
    for (std::int64_t end : ends) {
      ConfusionMatrix m;
      for (std::int64_t t = end - 500; t < end; ++t) {
        const auto& rec = r.trace.records[static_cast<std::size_t>(t)];
        m.add(rec.truth, rec.predicted);
      }
      worst = std::min(worst, kappa(m));
    }
    per_seed.push_back(worst);
  }
  return per_seed;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome plasticity(const ScenarioRuns& v, const ScenarioRuns& r) {
  const double mv = median(forest_tail_kappa(v));
  const double mr = median(forest_tail_kappa(r));
  return {mv >= 0.6 && mr >= 0.6,
          fmt("median over seeds of worst-concept last-500 kappa: virtual %.3f, real %.3f (need >= 0.6)", mv, mr)};
}

// ---------------------------------------------------------------------------

Outcome detector_study() {
  int detected = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Adwin a(0.002);
    Rng rng(derive_seed(6, seed));
    std::bernoulli_distribution pre(0.2), post(0.8);
    for (int i = 0; i < 1000; ++i) a.insert(pre(rng) ? 1.0 : 0.0);
    for (int i = 0; i < 300; ++i) {
      if (a.insert(post(rng) ? 1.0 : 0.0)) {
        ++detected;
        break;
      }
    }
  }
  int false_flags = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Adwin a(0.002);
    Rng rng(derive_seed(66, seed));
    std::bernoulli_distribution b(0.5);
    for (int i = 0; i < 10000; ++i) false_flags += a.insert(b(rng) ? 1.0 : 0.0);
  }
  return {detected >= 95 && false_flags <= 5,
          fmt("detected %d/100 within 300 steps (need >= 95); %d false flags over 100 stationary runs (need <= 5)",
              detected, false_flags)};
}

// ---------------------------------------------------------------------------

// Memorizes exact patterns and records the order of predict and learn calls.
class Spy final : public Learner {
 public:
  void learn(std::span<const LabeledExample> batch) override {
    for (const auto& e : batch) learned_at[e.features[0]] = tick++;
  }
  Prediction predict(const Features& x) const override {
    predicted_at.emplace(x[0], tick++);
    return {0, Eigen::VectorXd::Unit(2, 0)};
  }
  Checkpoint snapshot() const override { return std::make_shared<Spy>(*this); }
  int input_dim() const override { return 1; }
  std::string name() const override { return "spy"; }

  mutable std::map<double, long> predicted_at;
  std::map<double, long> learned_at;
  mutable long tick = 0;
};

std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[std::filesystem::relative(entry.path(), root).string()] = ss.str();
  }
  return out;
}

Outcome protocol_invariants() {
  std::string detail;
  bool ok = true;

  {  // test-then-train ordering
    Scenario s;
    s.name = "spy";
    s.feature_dim = 1;
    double v = 0;
    for (int c = 0; c < 3; ++c) {
      Concept k;
      for (int i = 0; i < 205; ++i) k.train.push_back({Features::Constant(1, v++), i % 2, c});
      k.test.push_back({Features::Constant(1, -1.0), 0, c});
      s.concepts.push_back(std::move(k));
    }
    s.schedule = DriftSchedule::abrupt({205, 410});
    s.drift_kinds.assign(2, DriftKind::unspecified);
    Spy spy;
    PrequentialOptions opt;
    opt.batch_size = 10;
    prequential_run(s, spy, opt);
    bool order = spy.learned_at.size() == 615 && spy.predicted_at.size() == 615;
    for (const auto& [x, t] : spy.learned_at) order = order && spy.predicted_at.at(x) < t;
    ok = ok && order;
    detail += fmt("test-then-train %s; ", order ? "ok" : "MISS");
  }
  {  // window reset and FIFO content
    RollingWindow w(1000);
    for (int i = 0; i < 1500; ++i) w.update(i % 2, (i / 3) % 2);
    bool fifo = w.size() == 1000;
    for (std::size_t k = 0; k < 1000 && fifo; ++k) {
      const int i = 500 + static_cast<int>(k);
      fifo = w.contents()[k] == std::pair<int, int>{i % 2, (i / 3) % 2};
    }
    w.update(1, 0, true);
    const bool reset = w.size() == 1 && w.contents().front() == std::pair<int, int>{1, 0};
    ok = ok && fifo && reset;
    detail += fmt("window FIFO %s, reset %s; ", fifo ? "ok" : "MISS", reset ? "ok" : "MISS");
  }
  {  // reservoir bound and inclusion law
    ExampleSet stream;
    for (int i = 0; i < 10000; ++i) stream.push_back({Features::Constant(1, i), 0, 0});
    std::vector<int> hits(10000, 0);
    bool bounded = true;
    for (std::uint64_t trial = 0; trial < 500; ++trial) {
      ReplayMemory m(100);
      Rng rng(derive_seed(7, trial));
      for (std::size_t i = 0; i < stream.size(); i += 10) {
        m.reservoir_update(std::span(stream).subspan(i, 10), rng);
        bounded = bounded && m.size() <= 100;
      }
      for (const auto& e : m.items()) ++hits[static_cast<std::size_t>(e.features[0])];
    }
    // per-item binomial sd is ~0.0045, so the 0.003 band is checked on 100-item block means
    double worst_block = 0.0;
    for (std::size_t block = 0; block < 100; ++block) {
      double f = 0.0;
      for (std::size_t i = block * 100; i < (block + 1) * 100; ++i) f += hits[i] / 500.0;
      worst_block = std::max(worst_block, std::abs(f / 100.0 - 0.01));
    }
    double var = 0.0;
    for (int h : hits) var += (h / 500.0 - 0.01) * (h / 500.0 - 0.01);
    const double sd = std::sqrt(var / 9999.0), binomial_sd = std::sqrt(0.01 * 0.99 / 500.0);
    const bool law = worst_block <= 0.003 && std::abs(sd - binomial_sd) <= 0.15 * binomial_sd;
    ok = ok && bounded && law;
    detail += fmt("reservoir bound %s, inclusion: worst block |f-0.01| %.5f, per-item sd %.5f vs binomial %.5f %s; ",
                  bounded ? "ok" : "MISS", worst_block, sd, binomial_sd, law ? "ok" : "MISS");
  }
  {  // end-to-end determinism under parallelism
    const auto cfg = parse_config_text(
        "[scenario]\nkind = real\nseeds = 0, 1, 2\nexamples_per_concept = 300\ntest_per_concept = 50\n"
        "[strategy.er]\nkind = er\n[strategy.agem]\nkind = agem\n[strategy.forest]\nkind = forest\n"
        "[strategy.nb]\nkind = nb\n");
    const auto a = oracle::scratch_dir("accept_jobs1");
    const auto b = oracle::scratch_dir("accept_jobs4");
    emit_report(run_grid(cfg, 1, 11, a), a);
    emit_report(run_grid(cfg, 4, 11, b), b);
    const auto ta = tree_bytes(a);
    const bool same = ta == tree_bytes(b);
    ok = ok && same;
    detail += fmt("jobs 1 vs 4: %zu files %s", ta.size(), same ? "byte-identical" : "DIFFER");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  report("AC1", "metric exactness", metric_exactness, 1.0);
  report("AC2", "gradient check", gradient_check, 10.0);

  ScenarioRuns virt, real;
  const auto t0 = std::chrono::steady_clock::now();
  virt = run_scenario("virtual");
  const double virt_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto t1 = std::chrono::steady_clock::now();
  real = run_scenario("real");
  const double real_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

  report("AC3", "virtual-drift direction", [&] {
    auto o = virtual_direction(virt);
    o.detail += fmt("; grid %.1fs", virt_s);
    o.pass = o.pass && virt_s < 300.0;
    return o;
  }, 300.0);
  report("AC4", "real-drift direction", [&] {
    auto o = real_direction(real);
    o.detail += fmt("; grid %.1fs", real_s);
    o.pass = o.pass && real_s < 300.0;
    return o;
  }, 300.0);
  report("AC5", "forest plasticity", [&] { return plasticity(virt, real); }, 600.0);
  report("AC6", "detector study", detector_study, 30.0);
  report("AC7", "protocol invariants", protocol_invariants, 60.0);

  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
