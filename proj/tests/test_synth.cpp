#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rebel/boost.hpp"
#include "rebel/error.hpp"
#include "rebel/synth.hpp"

using namespace rebel;

namespace {

MixtureSpec far_apart() {
  MixtureSpec spec;
  spec.num_classes = 3;
  spec.clusters = {{0, {-20, 0}}, {1, {20, 0}}, {2, {0, 25}}};
  spec.train_size = 150;
  spec.test_size = 60;
  spec.seed = 3;
  return spec;
}

}  // namespace

TEST(GenDataset, Deterministic) {
  const MixtureSpec spec = random_mixture(MixtureParams{}, 42);
  const auto a = gen_dataset(spec);
  const auto b = gen_dataset(spec);
  EXPECT_EQ(a.train.features, b.train.features);
  EXPECT_EQ(a.train.labels, b.train.labels);
  EXPECT_EQ(a.test.features, b.test.features);
  EXPECT_NE(a.train.features.row(0)[0], a.test.features.row(0)[0]);
  EXPECT_EQ(a.train.size(), 1000u);
  EXPECT_EQ(a.test.size(), 500u);
}

TEST(GenDataset, BalancedCounts) {
  MixtureSpec spec = far_apart();
  spec.train_size = 100;
  const auto split = gen_dataset(spec);
  std::vector<int> counts(3, 0);
  for (ClassIndex y : split.train.labels) ++counts[static_cast<std::size_t>(y)];
  EXPECT_EQ(counts, (std::vector<int>{34, 33, 33}));
}

TEST(GenDataset, ClusterMeansWithinTolerance) {
  MixtureSpec spec = random_mixture(MixtureParams{}, 7);
  spec.train_size = 4000;
  const auto split = gen_dataset(spec);
  for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < split.train.size(); ++i) {
      if (split.train_cluster[i] != c) continue;
      sx += split.train.features(i, 0);
      sy += split.train.features(i, 1);
      ++n;
    }
    ASSERT_GT(n, 0u);
    const auto& cl = spec.clusters[c];
    const double root_n = std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(sx / n, cl.mean[0], 5.0 * std::sqrt(cl.cov[0]) / root_n);
    EXPECT_NEAR(sy / n, cl.mean[1], 5.0 * std::sqrt(cl.cov[2]) / root_n);
  }
}

TEST(GenDataset, FarClustersAreLearnedByTenStumps) {
  const auto split = gen_dataset(far_apart());
  TrainConfig cfg;
  cfg.rounds = 10;
  cfg.early_stop_on_certificate = false;
  const auto r = train(split.train, CostMatrix::uniform(3), cfg);
  EXPECT_EQ(r.trace.rounds.back().train_error, 0.0);
}

TEST(MixtureSpec, InvalidCovarianceRejected) {
  MixtureSpec spec = far_apart();
  spec.clusters[1].cov = {1.0, 2.0, 1.0};
  EXPECT_THROW(gen_dataset(spec), InputError);
  spec = far_apart();
  spec.clusters.pop_back();
  EXPECT_THROW(gen_dataset(spec), InputError);
}

TEST(MixtureSpec, ParsesExplicitClusters) {
  const auto spec = parse_mixture_spec(
      "# two classes\nclasses = 2\ntrain = 40\ntest = 10\nseed = 9\n"
      "cluster = 1, -3, 0, 1, 0, 1\ncluster = 2, 3, 0.5, 2, 0.3, 1\n");
  EXPECT_EQ(spec.num_classes, 2);
  ASSERT_EQ(spec.clusters.size(), 2u);
  EXPECT_EQ(spec.clusters[1].label, 1);
  EXPECT_EQ(spec.clusters[1].cov[1], 0.3);
  EXPECT_EQ(spec.train_size, 40u);
  EXPECT_THROW(parse_mixture_spec("classes = 2\nbogus = 1\n"), InputError);
  EXPECT_THROW(parse_mixture_spec("classes 2\n"), InputError);
}

TEST(GenCostMatrix, NormalizedWithPositiveOffDiagonals) {
  const auto split = gen_dataset(random_mixture(MixtureParams{}, 5));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CostMatrix c = gen_cost_matrix(4, seed, split.train.labels);
    for (ClassIndex y = 0; y < 4; ++y)
      for (ClassIndex k = 0; k < 4; ++k) {
        if (y == k)
          EXPECT_EQ(c(y, k), 0.0);
        else
          EXPECT_GT(c(y, k), 0.0);
      }
    EXPECT_NEAR(expected_random_cost(c, split.train.labels), 1.0, 1e-12);
  }
  EXPECT_EQ(gen_cost_matrix(4, 3, split.train.labels), gen_cost_matrix(4, 3, split.train.labels));
}

TEST(RandomBinary, DeterministicWithBothClasses) {
  const Dataset a = random_binary_dataset(200, 5, 1);
  const Dataset b = random_binary_dataset(200, 5, 1);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  std::size_t ones = 0;
  for (ClassIndex y : a.labels) ones += y == 1 ? 1 : 0;
  EXPECT_GT(ones, 40u);
  EXPECT_LT(ones, 160u);
}

TEST(Fig3, SmallRunIsDeterministic) {
  Fig3Config cfg;
  cfg.datasets = 2;
  cfg.matrices = 2;
  cfg.mixture.train_size = 200;
  cfg.mixture.test_size = 100;
  cfg.train.rounds = 10;
  cfg.train.n_tau = 20;
  cfg.seed = 4;
  const auto a = run_fig3(cfg);
  cfg.workers = 3;
  const auto b = run_fig3(cfg);
  ASSERT_EQ(a.trials.size(), 4u);
  std::ostringstream sa, sb;
  write_fig3_csv(sa, a);
  write_fig3_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')), "trial_id,dataset_seed,cost_seed,rebel_risk,twostep_risk,winner");
}
