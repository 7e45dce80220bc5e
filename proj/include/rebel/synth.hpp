#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rebel/boost.hpp"
#include "rebel/costs.hpp"
#include "rebel/dataset.hpp"

namespace rebel {

/// A planar Gaussian cluster belonging to one class.
struct Cluster {
  ClassIndex label = 0;
  std::array<double, 2> mean{};
  /// Covariance entries (xx, xy, yy); must be symmetric positive definite.
  std::array<double, 3> cov{1.0, 0.0, 1.0};
};

struct MixtureSpec {
  int num_classes = 4;
  std::vector<Cluster> clusters;
  std::size_t train_size = 1000;
  std::size_t test_size = 500;
  std::uint64_t seed = 0;

  /// Throws InputError on a non-SPD covariance, a class without clusters,
  /// or fewer samples than classes.
  void validate() const;
};

/// Knobs for random_mixture.
struct MixtureParams {
  int num_classes = 4;
  int clusters_per_class = 2;
  double mean_range = 5.0;  ///< means uniform in [-range, range]^2
  double cov_min = 0.5;     ///< per-axis variance range of each cluster
  double cov_max = 1.5;
  std::size_t train_size = 1000;
  std::size_t test_size = 500;
};

/// Random cluster layout: uniform means, randomly rotated covariances with
/// per-axis variances uniform in [cov_min, cov_max].
MixtureSpec random_mixture(const MixtureParams& params, std::uint64_t seed);

/// key=value text. Keys: classes, clusters_per_class, mean_range, cov_min,
/// cov_max, train, test, seed, and optional explicit clusters given as
/// `cluster = label, mean_x, mean_y, cov_xx, cov_xy, cov_yy` (label 1-based).
/// Explicit clusters replace the random layout. '#' starts a comment.
MixtureSpec parse_mixture_spec(std::string_view text);

struct SyntheticSplit {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_cluster;  ///< index into spec.clusters
  std::vector<std::size_t> test_cluster;
};

/// Class counts are balanced (remainder to the lowest classes); each sample
/// draws a cluster uniformly among its class's clusters. Deterministic in
/// spec.seed; train and test use independent streams.
SyntheticSplit gen_dataset(const MixtureSpec& spec);

/// Off-diagonal |z|, z ~ N(0, 1) (exact zeros redrawn), zero diagonal, then
/// scaled so random guessing on `labels` costs 1.
CostMatrix gen_cost_matrix(int num_classes, std::uint64_t seed, std::span<const ClassIndex> labels);

/// N samples uniform in [-1, 1]^d labelled by the sign of a random linear
/// score, with 10% of labels flipped. Two classes, roughly balanced.
Dataset random_binary_dataset(std::size_t samples, std::size_t dims, std::uint64_t seed);

/// Derives an independent stream seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

struct Fig3Config {
  std::size_t datasets = 10;
  std::size_t matrices = 20;
  MixtureParams mixture;
  TrainConfig train;  ///< defaults to 100 stumps without early stopping
  std::uint64_t seed = 0;
  unsigned workers = 1;

  Fig3Config();
};

struct Fig3Trial {
  std::size_t trial_id = 0;
  std::uint64_t dataset_seed = 0;
  std::uint64_t cost_seed = 0;
  double rebel_risk = 0.0;
  double twostep_risk = 0.0;
  std::string winner;  ///< "rebel", "twostep" or "tie"
};

struct Fig3Result {
  std::vector<Fig3Trial> trials;
  double rebel_win_fraction = 0.0;
};

/// Cost-sensitive training against the two-step baseline (0-1 training,
/// softmax(2H) posterior, expected-cost argmin) on every dataset x matrix.
Fig3Result run_fig3(const Fig3Config& config);

/// CSV: trial_id,dataset_seed,cost_seed,rebel_risk,twostep_risk,winner
void write_fig3_csv(std::ostream& out, const Fig3Result& result);

}  // namespace rebel
