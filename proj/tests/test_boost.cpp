#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rebel/boost.hpp"
#include "rebel/error.hpp"
#include "rebel/loss.hpp"

using namespace rebel;
using oracle::make_dataset;

namespace {

void expect_weights_near(const WeightState& a, const WeightState& b, double rel) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.plus.values().size(); ++i) {
    const double p = b.plus.values()[i], m = b.minus.values()[i];
    EXPECT_NEAR(a.plus.values()[i], p, rel * (1.0 + std::abs(p)));
    EXPECT_NEAR(a.minus.values()[i], m, rel * (1.0 + std::abs(m)));
  }
}

TrainConfig quiet(std::size_t rounds, int depth = 1) {
  TrainConfig cfg;
  cfg.rounds = rounds;
  cfg.tree_depth = depth;
  cfg.n_tau = 25;
  cfg.early_stop_on_certificate = false;
  return cfg;
}

Dataset separable() {
  return make_dataset({{-1}, {-0.5}, {-0.7}, {0.6}, {1}, {0.8}}, {0, 0, 0, 1, 1, 1}, 2);
}

}  // namespace

TEST(InitWeights, ZeroOneCosts) {
  const Dataset d = make_dataset({{0}, {1}}, {0, 2}, 3);
  const auto w = init_weights(d, CostMatrix::uniform(3));
  EXPECT_EQ(std::vector<double>(w.plus.row(0).begin(), w.plus.row(0).end()), (std::vector<double>{0, 1, 1}));
  EXPECT_EQ(std::vector<double>(w.minus.row(0).begin(), w.minus.row(0).end()), (std::vector<double>{1, 0, 0}));
}

TEST(InitWeights, LinearInCosts) {
  std::mt19937_64 rng(20);
  const Dataset d = oracle::blobs(3, 5, 1.0, rng);
  const CostMatrix c = oracle::random_costs(3, rng);
  const auto w = init_weights(d, c);
  const auto v = init_weights(d, c.scaled(4.0));
  for (std::size_t i = 0; i < w.plus.values().size(); ++i) {
    EXPECT_NEAR(v.plus.values()[i], 4.0 * w.plus.values()[i], 1e-12);
    EXPECT_NEAR(v.minus.values()[i], 4.0 * w.minus.values()[i], 1e-12);
  }
}

TEST(FitConstant, BalancedIsZeroAndRecomputes) {
  const Dataset d = separable();
  auto w = init_weights(d, CostMatrix::uniform(2));
  const auto a0 = fit_constant(w, 1.0 / 24.0);
  EXPECT_EQ(a0, (std::vector<double>{0, 0}));
}

TEST(FitConstant, ImbalancedFavoursMajority) {
  std::vector<std::vector<double>> rows;
  std::vector<ClassIndex> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i < 9 ? 0 : 1);
  }
  const Dataset d = make_dataset(rows, labels, 2);
  const CostMatrix c = CostMatrix::uniform(2);
  auto w = init_weights(d, c);
  const auto a0 = fit_constant(w, 1.0 / 40.0);
  EXPECT_GT(a0[0], 0.0);
  EXPECT_LT(a0[1], 0.0);
  StrongClassifier m(2, 1);
  m.a0 = a0;
  expect_weights_near(w, weights_from_model(m, d, c), 1e-14);
}

TEST(FitConstant, DisabledLeavesZero) {
  auto cfg = quiet(2);
  cfg.fit_a0 = false;
  const auto r = train(separable(), CostMatrix::uniform(2), cfg);
  EXPECT_EQ(r.model.a0, (std::vector<double>{0, 0}));
}

TEST(UpdateWeights, Examples) {
  WeightState w{Matrix(1, 2, 1.0), Matrix(1, 2, 1.0)};
  const std::vector<std::int8_t> out{1};
  const std::vector<double> zero{0, 0};
  update_weights(w, out, zero, 1);
  EXPECT_EQ(w.plus(0, 0), 1.0);
  const std::vector<double> a{std::log(2.0), -std::log(2.0)};
  update_weights(w, out, a, 1);
  EXPECT_NEAR(w.plus(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(w.plus(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(w.minus(0, 0), 0.5, 1e-15);
}

TEST(UpdateWeights, OverflowReportsRound) {
  WeightState w{Matrix(1, 2, 1.0), Matrix(1, 2, 1.0)};
  const std::vector<std::int8_t> out{1};
  const std::vector<double> a{800, 0};
  try {
    update_weights(w, out, a, 7);
    FAIL() << "expected NumericRangeError";
  } catch (const NumericRangeError& e) {
    EXPECT_EQ(e.round(), 7u);
  }
}

TEST(Edge, Examples) {
  const LossFloor floor{0.0, 1.0};
  const auto perfect = edge(SplitScores{{0.5, 0}, {0, 0.5}}, 0.0, floor);
  ASSERT_TRUE(perfect.gamma.has_value());
  EXPECT_DOUBLE_EQ(*perfect.gamma, 1.0);
  EXPECT_DOUBLE_EQ(*perfect.phi, 1.0);
  const auto flat = edge(SplitScores{{0.3, 0.2}, {0.3, 0.2}}, 0.0, floor);
  EXPECT_EQ(*flat.gamma, 0.0);
}

TEST(Predict, EmptyModelPicksFirstClass) {
  const StrongClassifier m(3, 2);
  const double x[] = {0.4, -2.0};
  const auto p = predict(m, x);
  EXPECT_EQ(p.label, 0);
  EXPECT_EQ(p.scores, (std::vector<double>{0, 0, 0}));
  const double wrong[] = {1.0};
  EXPECT_THROW(predict(m, wrong), InputError);
}

TEST(Train, SeparableInOneRound) {
  const Dataset d = separable();
  const auto r = train(d, CostMatrix::uniform(2), quiet(1));
  ASSERT_EQ(r.trace.rounds.size(), 1u);
  EXPECT_EQ(r.trace.rounds[0].train_error, 0.0);
  for (std::size_t n = 0; n < d.size(); ++n) EXPECT_EQ(r.model.predict(d.sample(n)), d.labels[n]);
}

TEST(Train, BinaryUniformScoresAreAntisymmetric) {
  const Dataset d = oracle::xor_dataset();
  std::size_t checked = 0;
  train(d, CostMatrix::uniform(2), quiet(30, 2), [&](std::size_t, const StrongClassifier& m, const WeightState&) {
    for (std::size_t n = 0; n < d.size(); ++n) {
      const auto h = m.scores(d.sample(n));
      EXPECT_NEAR(h[0] + h[1], 0.0, 1e-9);
    }
    ++checked;
  });
  EXPECT_EQ(checked, 30u);
}

TEST(Train, IncrementalWeightsMatchRecomputation) {
  std::mt19937_64 rng(21);
  const Dataset d = oracle::blobs(4, 25, 1.5, rng);
  const CostMatrix c = oracle::random_costs(4, rng);
  train(d, c, quiet(15, 2), [&](std::size_t, const StrongClassifier& m, const WeightState& w) {
    expect_weights_near(w, weights_from_model(m, d, c), 1e-9);
  });
}

TEST(Train, LossFromWeightsMatchesSurrogate) {
  std::mt19937_64 rng(22);
  const Dataset d = oracle::blobs(3, 30, 1.5, rng);
  const CostMatrix c = oracle::random_costs(3, rng);
  const auto r = train(d, c, quiet(20));
  const double direct = oracle::surrogate(r.model, d, c);
  EXPECT_NEAR(r.trace.rounds.back().loss, direct, 1e-9 * (1.0 + std::abs(direct)));
  EXPECT_NEAR(loss_from_weights(r.weights, d, c), direct, 1e-9 * (1.0 + std::abs(direct)));
}

TEST(Train, WeakLearningConditionWitness) {
  std::mt19937_64 rng(23);
  const Dataset d = oracle::blobs(3, 20, 1.0, rng);
  const CostMatrix c = oracle::random_costs(3, rng);
  const auto r = train(d, c, quiet(12));
  double previous = r.trace.initial_loss;
  for (std::size_t t = 1; t <= r.model.rounds.size(); ++t) {
    const WeightState before = weights_from_model(r.model.prefix(t - 1), d, c);
    const auto outputs = evaluate_outputs(r.model.rounds[t - 1].learner, d);
    const double current = r.trace.rounds[t - 1].loss;
    if (wlc_condition_value(before, outputs) > 1e-9) {
      EXPECT_LT(current, previous) << "round " << t;
    }
    EXPECT_LE(current, previous + 1e-12);
    previous = current;
  }
}

TEST(Train, DeterministicAndWorkerIndependent) {
  std::mt19937_64 rng(24);
  const Dataset d = oracle::blobs(4, 30, 1.0, rng, 3);
  const CostMatrix c = oracle::random_costs(4, rng);
  auto cfg = quiet(10, 3);
  const auto a = train(d, c, cfg);
  const auto b = train(d, c, cfg);
  cfg.workers = 4;
  const auto p = train(d, c, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.model, p.model);
}

TEST(Train, CertificateStopHasZeroRisk) {
  const Dataset d = separable();
  TrainConfig cfg;
  cfg.rounds = 50;
  cfg.n_tau = 10;
  const auto r = train(d, CostMatrix::uniform(2), cfg);
  EXPECT_EQ(r.trace.stop, StopReason::Certificate);
  ASSERT_FALSE(r.trace.rounds.empty());
  EXPECT_LT(r.trace.rounds.back().loss, r.trace.l_bullet);
  EXPECT_EQ(r.trace.rounds.back().train_risk, 0.0);
}

TEST(Train, RejectsBadInput) {
  const Dataset d = make_dataset({{1}, {1}, {1}}, {0, 1, 0}, 2);
  EXPECT_THROW(train(d, CostMatrix::uniform(2), quiet(3)), InputError);
  EXPECT_THROW(train(separable(), CostMatrix::uniform(2), quiet(3, 0)), InputError);
}
