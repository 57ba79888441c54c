#include "oracles.hpp"
#include "sclbench/errors.hpp"
#include "sclbench/mlp.hpp"
#include "sclbench/ocl.hpp"
#include "sclbench/stream_gen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace sclbench {
namespace {

ExampleSet parity_batch(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> digit(0, 9);
  ExampleSet out;
  for (int i = 0; i < n; ++i) {
    const int d = digit(rng);
    out.push_back({sample_example(d, 0.05, rng), d % 2, 0});
  }
  return out;
}

TEST(MlpForward, ZeroParamsGiveZeroLogits) {
  const auto p = MlpParams<double>::zeros(7, 512, 2);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(7, 3);
  EXPECT_TRUE(mlp_forward(p, x).isZero());
}

TEST(MlpForward, HandComputedTinyNet) {
  auto p = MlpParams<double>::zeros(2, 2, 2);
  p.w1 << 1, -1, 2, 0;
  p.b1 << 0, -1;
  p.w2 << 1, 1, -1, 0.5;
  p.b2 << 0.5, 0;
  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  // hidden = relu([1-2, 2-1]) = [0, 1]
  const Eigen::MatrixXd z = mlp_forward(p, x);
  EXPECT_DOUBLE_EQ(z(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(z(1, 0), 0.5);
}

TEST(MlpForward, Errors) {
  const auto p = MlpParams<double>::zeros(7, 4, 2);
  EXPECT_THROW(mlp_forward(p, Eigen::MatrixXd(7, 0)), std::invalid_argument);
  EXPECT_THROW(mlp_forward(p, Eigen::MatrixXd::Zero(6, 2)), std::invalid_argument);
  const std::vector<int> y{0, 1};
  EXPECT_THROW(mlp_backward(p, Eigen::MatrixXd::Zero(5, 2), std::span<const int>(y)), std::invalid_argument);
}

TEST(MlpForward, FloatInstantiation) {
  Rng rng(0);
  const auto p = MlpParams<float>::glorot(7, 16, 2, rng);
  const Eigen::MatrixXf x = Eigen::MatrixXf::Ones(7, 4);
  EXPECT_TRUE(mlp_forward(p, x).allFinite());
}

TEST(MlpBackward, MatchesFiniteDifferences) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto p = MlpParams<double>::fan_in_uniform(7, 8, 2, rng);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd x(7, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    const std::vector<int> y{0, 1, 1, 0, 1, 0};
    const auto [g, loss] = mlp_backward(p, x, std::span<const int>(y));
    EXPECT_NEAR(loss, oracle::mlp_loss(p, x, y), 1e-12);
    const Eigen::VectorXd analytic = g.flatten();
    const Eigen::VectorXd numeric = oracle::finite_difference_gradient(p, x, y);
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-7});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(MlpBackward, DuplicatedBatchSameGradient) {
  Rng rng(2);
  const auto p = MlpParams<double>::fan_in_uniform(7, 16, 2, rng);
  const auto [x, y] = to_batch(parity_batch(5, 3));
  Eigen::MatrixXd x2(7, 10);
  x2 << x, x;
  std::vector<int> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  const auto g1 = mlp_backward(p, x, std::span<const int>(y)).first.flatten();
  const auto g2 = mlp_backward(p, x2, std::span<const int>(y2)).first.flatten();
  EXPECT_TRUE(g1.isApprox(g2, 1e-12));
}

TEST(MlpBackward, SaturatedLogitsHaveTinyLoss) {
  auto p = MlpParams<double>::zeros(1, 1, 2);
  p.w1(0, 0) = 1.0;
  p.w2 << -10.0, 10.0;
  Eigen::MatrixXd x(1, 2);
  x << 2.0, 3.0;
  const std::vector<int> y{1, 1};
  EXPECT_LT(mlp_backward(p, x, std::span<const int>(y)).second, 1e-3);
}

TEST(Sgd, ZeroGradientIsFixedPoint) {
  Rng rng(0);
  auto p = MlpParams<double>::glorot(7, 8, 2, rng);
  const auto before = p;
  SgdMomentum<double> opt(p, 0.1, 0.9);
  opt.step(p, MlpParams<double>::zeros(7, 8, 2));
  EXPECT_EQ(p, before);
}

TEST(Sgd, ScalarMomentumHandIteration) {
  auto p = MlpParams<double>::zeros(1, 1, 1);
  p.b2[0] = 1.0;
  auto g = MlpParams<double>::zeros(1, 1, 1);
  g.b2[0] = 1.0;
  SgdMomentum<double> opt(p, 0.1, 0.9);
  opt.step(p, g);
  opt.step(p, g);
  EXPECT_NEAR(p.b2[0], 0.71, 1e-15);
}

TEST(Sgd, NoMomentumIsPlainSgd) {
  Rng rng(1);
  auto p = MlpParams<double>::glorot(3, 4, 2, rng);
  auto g = MlpParams<double>::glorot(3, 4, 2, rng);
  const Eigen::VectorXd expected = p.flatten() - 0.05 * g.flatten();
  SgdMomentum<double> opt(p, 0.05, 0.0);
  opt.step(p, g);
  EXPECT_TRUE(p.flatten().isApprox(expected, 1e-15));
}

TEST(Sgd, NonFiniteGradientRejected) {
  auto p = MlpParams<double>::zeros(2, 2, 2);
  auto g = MlpParams<double>::zeros(2, 2, 2);
  g.w1(0, 1) = std::numeric_limits<double>::quiet_NaN();
  SgdMomentum<double> opt(p, 0.1, 0.9);
  EXPECT_THROW(opt.step(p, g), NumericError);
}

TEST(Agem, HandCases) {
  Eigen::Vector2d g(1, 0), r(0, 1);
  EXPECT_EQ(agem_project(g, r), g);
  Eigen::Vector2d g2(1, -1);
  EXPECT_TRUE(agem_project(g2, r).isApprox(Eigen::Vector2d(1, 0)));
  EXPECT_EQ(agem_project(g2, Eigen::Vector2d::Zero()), g2);
  EXPECT_THROW(agem_project(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2)), std::invalid_argument);
}

TEST(Agem, ProjectionProperties) {
  Rng rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Eigen::VectorXd g(50), r(50);
    for (int i = 0; i < 50; ++i) {
      g[i] = n(rng);
      r[i] = n(rng);
    }
    const Eigen::VectorXd out = agem_project(g, r);
    EXPECT_GE(out.dot(r), -1e-9);
    if (g.dot(r) < 0) EXPECT_LE(out.norm(), g.norm() + 1e-9);
  }
}

// ---------------------------------------------------------------------------

TEST(Reservoir, PreSaturationKeepsEverything) {
  ReplayMemory m(500);
  Rng rng(0);
  const ExampleSet data = parity_batch(500, 1);
  m.reservoir_update(data, rng);
  ASSERT_EQ(m.size(), 500u);
  EXPECT_EQ(m.items(), data);
}

TEST(Reservoir, UniformInclusion) {
  const int items = 10000;
  std::vector<int> hits(items, 0);
  ExampleSet stream;
  for (int i = 0; i < items; ++i) stream.push_back({Features::Constant(1, i), 0, 0});
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    ReplayMemory m(100);
    Rng rng(trial);
    for (int i = 0; i < items; i += 10) {
      m.reservoir_update(std::span(stream).subspan(static_cast<std::size_t>(i), 10), rng);
      ASSERT_LE(m.size(), 100u);
    }
    for (const auto& e : m.items()) ++hits[static_cast<std::size_t>(e.features[0])];
  }
  // a single item's frequency over 500 trials has binomial sd ~0.0045, wider than the 0.003 band,
  // so the band is applied to 100-item blocks and the per-item spread is checked against the binomial sd
  for (int block = 0; block < items / 100; ++block) {
    double f = 0.0;
    for (int i = block * 100; i < (block + 1) * 100; ++i) f += hits[static_cast<std::size_t>(i)] / 500.0;
    EXPECT_NEAR(f / 100.0, 0.01, 0.003) << "block " << block;
  }
  double var = 0.0;
  for (int h : hits) var += (h / 500.0 - 0.01) * (h / 500.0 - 0.01);
  const double sd = std::sqrt(var / (items - 1));
  EXPECT_NEAR(sd, std::sqrt(0.01 * 0.99 / 500.0), 0.15 * std::sqrt(0.01 * 0.99 / 500.0));
}

TEST(Reservoir, ZeroCapacityStaysEmpty) {
  ReplayMemory m(0);
  Rng rng(0);
  m.reservoir_update(parity_batch(100, 2), rng);
  EXPECT_TRUE(m.empty());
  EXPECT_TRUE(m.sample(10, rng).empty());
}

TEST(Reservoir, SampleWithoutReplacement) {
  ReplayMemory m(20);
  Rng rng(0);
  ExampleSet data;
  for (int i = 0; i < 20; ++i) data.push_back({Features::Constant(1, i), 0, 0});
  m.reservoir_update(data, rng);
  const ExampleSet s = m.sample(20, rng);
  std::set<double> seen;
  for (const auto& e : s) seen.insert(e.features[0]);
  EXPECT_EQ(seen.size(), 20u);
  EXPECT_EQ(m.sample(50, rng).size(), 20u);
}

OclConfig small(OclStrategy s) {
  OclConfig c;
  c.strategy = s;
  c.hidden = 32;
  return c;
}

TEST(OclLearner, ReplayWithEmptyMemoryEqualsNaive) {
  OclLearner naive(7, 5, small(OclStrategy::naive));
  OclLearner er(7, 5, small(OclStrategy::replay));
  ASSERT_EQ(naive.params(), er.params());
  const ExampleSet batch = parity_batch(10, 6);
  naive.learn(batch);
  er.learn(batch);
  EXPECT_EQ(naive.params(), er.params());
  EXPECT_EQ(er.memory().size(), 10u);
}

TEST(OclLearner, AgemIdentityBranchEqualsNaive) {
  // memory holds exactly the current batch, so the reference gradient points the same way
  OclConfig cfg = small(OclStrategy::agem);
  cfg.memory_capacity = 10;
  OclLearner agem(7, 8, cfg);
  OclLearner naive(7, 8, small(OclStrategy::naive));
  const ExampleSet batch = parity_batch(10, 9);
  for (int i = 0; i < 3; ++i) {
    agem.learn(batch);
    naive.learn(batch);
  }
  EXPECT_EQ(agem.projections(), 0u);
  EXPECT_EQ(agem.params(), naive.params());
}

TEST(OclLearner, AgemProjectsOnConflict) {
  OclLearner agem(7, 8, small(OclStrategy::agem));
  ExampleSet data = parity_batch(2000, 10);
  for (std::size_t i = 1000; i < data.size(); ++i) data[i].label = 1 - data[i].label;
  for (std::size_t i = 0; i < data.size(); i += 10) agem.learn(std::span(data).subspan(i, 10));
  EXPECT_GT(agem.projections(), 0u);
}

TEST(OclLearner, MemorySaturatesAtCapacity) {
  OclLearner er(7, 1, small(OclStrategy::replay));
  const ExampleSet data = parity_batch(2000, 11);
  for (std::size_t i = 0; i < data.size(); i += 10) {
    er.learn(std::span(data).subspan(i, 10));
    ASSERT_LE(er.memory().size(), 500u);
  }
  EXPECT_EQ(er.memory().size(), 500u);
  EXPECT_EQ(er.memory().seen(), 2000u);
}

TEST(OclLearner, EmptyBatchRejected) {
  OclLearner l(7, 1, small(OclStrategy::naive));
  EXPECT_THROW(l.learn(ExampleSet{}), std::invalid_argument);
}

TEST(OclLearner, DeterministicFinalParameters) {
  for (auto s : {OclStrategy::naive, OclStrategy::replay, OclStrategy::agem}) {
    const ExampleSet data = parity_batch(1000, 12);
    OclLearner a(7, 77, small(s)), b(7, 77, small(s));
    for (std::size_t i = 0; i < data.size(); i += 10) {
      a.learn(std::span(data).subspan(i, 10));
      b.learn(std::span(data).subspan(i, 10));
    }
    EXPECT_EQ(a.params(), b.params()) << to_string(s);
  }
}

TEST(OclLearner, LearnsParity) {
  OclLearner l(7, 3, {});
  const ExampleSet data = parity_batch(4000, 13);
  for (std::size_t i = 0; i < data.size(); i += 10) l.learn(std::span(data).subspan(i, 10));
  int correct = 0;
  for (const auto& e : parity_batch(1000, 14)) correct += l.predict(e.features).label == e.label;
  EXPECT_GT(correct / 1000.0, 0.8);
}

TEST(OclCheckpoint, IsolatedAndReproducible) {
  const ExampleSet probes = parity_batch(100, 15);
  OclLearner a(7, 21, small(OclStrategy::replay));
  OclLearner b(7, 21, small(OclStrategy::replay));
  const Checkpoint ca = a.snapshot(), cb = b.snapshot();
  std::vector<int> before;
  for (const auto& e : probes) {
    before.push_back(ca->predict(e.features).label);
    EXPECT_EQ(before.back(), cb->predict(e.features).label);
  }
  const ExampleSet data = parity_batch(500, 16);
  for (std::size_t i = 0; i < data.size(); i += 10) a.learn(std::span(data).subspan(i, 10));
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_EQ(ca->predict(probes[i].features).label, before[i]);
}

TEST(OclCheckpoint, ArgmaxWithLowIndexTies) {
  const MlpClassifier zero(MlpParams<double>::zeros(7, 4, 2));
  EXPECT_EQ(zero.predict(Features::Ones(7)).label, 0);
  Rng rng(4);
  const MlpClassifier c(MlpParams<double>::glorot(7, 16, 2, rng));
  for (const auto& e : parity_batch(50, 17)) {
    const Eigen::MatrixXd z = mlp_forward(c.params(), e.features);
    EXPECT_EQ(c.predict(e.features).label, z(1, 0) > z(0, 0) ? 1 : 0);
  }
}

}  // namespace
}  // namespace sclbench
