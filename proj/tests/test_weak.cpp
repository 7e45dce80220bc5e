#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rebel/boost.hpp"
#include "rebel/error.hpp"
#include "rebel/loss.hpp"
#include "rebel/weak.hpp"

using namespace rebel;
using oracle::make_dataset;

namespace {

SplitScores swapped(const SplitScores& s) { return {s.s_minus, s.s_plus}; }

std::vector<double> negated(std::vector<double> a) {
  for (double& v : a) v = -v;
  return a;
}

}  // namespace

TEST(BuildGrid, EvenSpacing) {
  const Dataset d = make_dataset({{0, 3}, {10, 3}, {5, 3}}, {0, 1, 0}, 2);
  auto g = build_grid(d, 1);
  EXPECT_EQ(g.thresholds[0], (std::vector<double>{5}));
  EXPECT_EQ(g.thresholds[1], (std::vector<double>{3}));
  EXPECT_FALSE(g.constant[0]);
  EXPECT_TRUE(g.constant[1]);
  g = build_grid(d, 4);
  EXPECT_EQ(g.thresholds[0], (std::vector<double>{2, 4, 6, 8}));
}

TEST(BuildGrid, EmptyRejected) {
  Dataset d;
  d.num_classes = 2;
  EXPECT_THROW(build_grid(d, 4), InputError);
}

TEST(Stump, SignOfZeroIsNegative) {
  const Stump s{0, 1.0, 1};
  const double at[] = {1.0}, above[] = {1.5};
  EXPECT_EQ(s(at), -1);
  EXPECT_EQ(s(above), 1);
  EXPECT_EQ((Stump{0, 1.0, -1})(above), -1);
}

TEST(Tree, DeepenedKeepsFunction) {
  std::mt19937_64 rng(9);
  const Dataset d = oracle::blobs(3, 20, 2.0, rng);
  const Tree t(2, {Stump{0, 0.1, 1}, Stump{1, -0.3, -1}, Stump{1, 0.5, 1}});
  const Tree deeper = t.deepened();
  EXPECT_EQ(deeper.depth(), 3);
  for (std::size_t n = 0; n < d.size(); ++n) EXPECT_EQ(t(d.sample(n)), deeper(d.sample(n)));
}

TEST(AccumulateSplit, HandExample) {
  WeightState w{Matrix(2, 2), Matrix(2, 2)};
  w.plus(0, 0) = 1;
  w.minus(0, 1) = 1;
  w.plus(1, 1) = 2;
  w.minus(1, 0) = 2;
  const std::vector<std::int8_t> outputs{1, -1};
  const auto s = accumulate_split(outputs, w);
  EXPECT_EQ(s.s_plus, (std::vector<double>{0.75, 0}));
  EXPECT_EQ(s.s_minus, (std::vector<double>{0, 0.75}));
}

TEST(AccumulateSplit, ConstantAndNegatedLearners) {
  std::mt19937_64 rng(10);
  const Dataset d = oracle::blobs(3, 10, 2.0, rng);
  const WeightState w = oracle::random_weights(d.size(), 3, rng);
  const Stump always{0, -1e9, 1};
  const auto s = accumulate_split(always, d, w);
  for (std::size_t k = 0; k < 3; ++k) {
    double p = 0.0, m = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
      p += w.plus(n, k);
      m += w.minus(n, k);
    }
    EXPECT_NEAR(s.s_plus[k], p / (2.0 * d.size()), 1e-15);
    EXPECT_NEAR(s.s_minus[k], m / (2.0 * d.size()), 1e-15);
  }
  const Stump f{1, 0.2, 1}, g{1, 0.2, -1};
  const auto a = accumulate_split(f, d, w);
  const auto b = accumulate_split(g, d, w);
  EXPECT_EQ(a.s_plus, b.s_minus);
  EXPECT_EQ(a.s_minus, b.s_plus);
}

TEST(OptimalVector, Examples) {
  SplitScores sym{{0.3, 0.1}, {0.3, 0.1}};
  EXPECT_EQ(optimal_vector(sym, 0.01).a, (std::vector<double>{0, 0}));

  const SplitScores s{{0.75, 0}, {0, 0.75}};
  const auto fit = optimal_vector(s, 0.01);
  EXPECT_NEAR(fit.a[0], 0.5 * std::log(0.01 / 0.76), 1e-15);
  EXPECT_NEAR(fit.a[1], 0.5 * std::log(0.76 / 0.01), 1e-15);
  EXPECT_NEAR(fit.a[1], 2.165, 1e-3);
  EXPECT_EQ(fit.loss_excess, 0.0);
}

TEST(OptimalVector, UnsmoothedVoteAttainsCriterion) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int i = 0; i < 100; ++i) {
    SplitScores s{{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
    const auto fit = optimal_vector(s, 0.0);
    EXPECT_NEAR(split_loss(s, fit.a), fit.loss_excess, 1e-12);
    // any perturbation is no better
    auto a = fit.a;
    a[static_cast<std::size_t>(i % 3)] += 0.01;
    EXPECT_GE(split_loss(s, a), fit.loss_excess);
  }
}

TEST(OptimalVector, PolarityFlipIsSymmetric) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    SplitScores s{{u(rng), u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng), u(rng)}};
    const auto fit = optimal_vector(s, 0.003);
    const auto flipped = optimal_vector(swapped(s), 0.003);
    EXPECT_EQ(fit.loss_excess, flipped.loss_excess);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(flipped.a[k], -fit.a[k], 1e-15);
    EXPECT_NEAR(split_loss(swapped(s), negated(fit.a)), split_loss(s, fit.a), 1e-14);
  }
}

TEST(StumpSearch, SeparableOneDimensional) {
  const Dataset d = make_dataset({{-1}, {-0.8}, {-1.2}, {1}, {0.9}, {1.3}}, {0, 0, 0, 1, 1, 1}, 2);
  const CostMatrix costs = CostMatrix::uniform(2);
  const auto grid = build_grid(d, 50);
  const auto choice = stump_search(d, init_weights(d, costs), grid, 1.0 / 24.0);
  EXPECT_GT(choice.stump.threshold, -0.8);
  EXPECT_LT(choice.stump.threshold, 0.9);
  EXPECT_EQ(choice.loss_excess, 0.0);
  StrongClassifier m(2, 1);
  m.rounds.push_back({Tree(choice.stump), choice.a});
  for (std::size_t n = 0; n < d.size(); ++n) EXPECT_EQ(m.predict(d.sample(n)), d.labels[n]);
}

TEST(StumpSearch, DuplicatedDatasetGivesSameChoice) {
  std::mt19937_64 rng(13);
  const Dataset d = oracle::blobs(3, 15, 1.5, rng, 3);
  Dataset twice = d;
  for (std::size_t n = 0; n < d.size(); ++n) {
    twice.features.append_row(d.sample(n));
    twice.labels.push_back(d.labels[n]);
  }
  const CostMatrix costs = oracle::random_costs(3, rng);
  const auto grid = build_grid(d, 30);
  const double eps = 0.01;
  const auto a = stump_search(d, init_weights(d, costs), grid, eps);
  const auto b = stump_search(twice, init_weights(twice, costs), grid, eps);
  EXPECT_EQ(a.stump, b.stump);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.a[k], b.a[k], 1e-12);
  EXPECT_NEAR(a.loss_excess, b.loss_excess, 1e-12);
}

TEST(StumpSearch, MatchesNaiveSearch) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + trial % 4;
    const Dataset d = oracle::blobs(k, 8, 1.0, rng, 1 + trial % 4);
    const WeightState w = oracle::random_weights(d.size(), static_cast<std::size_t>(k), rng);
    const auto grid = build_grid(d, 5 + trial);
    const auto fast = stump_search(d, w, grid, 0.01, 1 + trial % 3);
    const auto slow = oracle::naive_stump_search(d, w, grid);
    EXPECT_EQ(fast.stump.feature, slow.feature);
    EXPECT_EQ(fast.threshold_index, slow.threshold_index);
    EXPECT_NEAR(fast.loss_excess, slow.value, 1e-12 * (1.0 + slow.value));
  }
}

TEST(StumpSearch, CriterionMatchesRecomputedSurrogate) {
  std::mt19937_64 rng(15);
  const Dataset d = oracle::blobs(3, 20, 2.0, rng);
  const CostMatrix costs = oracle::random_costs(3, rng);
  const auto w = init_weights(d, costs);
  const auto choice = stump_search(d, w, build_grid(d, 40), 0.0);
  StrongClassifier m(3, 2);
  m.rounds.push_back({Tree(choice.stump), choice.a});
  const auto r = surrogate_loss(m, d, costs);

  double mean_c_star = 0.0;
  for (ClassIndex y : d.labels) mean_c_star += sample_terms(costs, y).c_star;
  mean_c_star /= 2.0 * static_cast<double>(d.size());
  EXPECT_NEAR(r.excess, choice.loss_excess - mean_c_star, 1e-9);
  EXPECT_NEAR(r.excess, split_loss(choice.scores, choice.a) - mean_c_star, 1e-9);
}

TEST(StumpSearch, AllConstantRejected) {
  const Dataset d = make_dataset({{1}, {1}, {1}}, {0, 1, 0}, 2);
  EXPECT_THROW(stump_search(d, init_weights(d, CostMatrix::uniform(2)), build_grid(d, 3), 0.1), InputError);
}

TEST(GrowLayer, NeverIncreasesLoss) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + trial % 3;
    const Dataset d = oracle::blobs(k, 15, 1.0, rng);
    const CostMatrix costs = oracle::random_costs(k, rng);
    const BinnedFeatures binned(d, build_grid(d, 15));
    const WeightState w = init_weights(d, costs);
    const double eps = 1.0 / (2.0 * d.size() * k);
    const auto root = stump_search(binned, w, eps);
    Tree tree(root.stump);
    std::vector<double> a = root.a;
    double loss = split_loss(accumulate_split(tree, d, w), a);
    for (int depth = 2; depth <= 4; ++depth) {
      const auto grown = grow_layer(tree, a, d, binned, w, eps);
      EXPECT_EQ(grown.tree.depth(), depth);
      EXPECT_LE(grown.loss, loss);
      EXPECT_NEAR(grown.loss, split_loss(accumulate_split(grown.tree, d, w), grown.a), 1e-12);
      tree = grown.tree;
      a = grown.a;
      loss = grown.loss;
    }
  }
}

TEST(GrowLayer, PerfectSplitStaysAtFloor) {
  const Dataset d = make_dataset({{-1, 0}, {-2, 1}, {1, 0}, {2, -1}}, {0, 0, 1, 1}, 2);
  const CostMatrix costs = CostMatrix::uniform(2);
  const BinnedFeatures binned(d, build_grid(d, 9));
  const WeightState w = init_weights(d, costs);
  const auto root = stump_search(binned, w, 0.1);
  ASSERT_EQ(root.loss_excess, 0.0);
  const auto grown = grow_layer(Tree(root.stump), root.a, d, binned, w, 0.1);
  EXPECT_EQ(grown.loss_excess, 0.0);
  EXPECT_LE(grown.loss, split_loss(root.scores, root.a));
}
