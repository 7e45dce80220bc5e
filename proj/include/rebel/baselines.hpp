#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rebel/costs.hpp"
#include "rebel/dataset.hpp"
#include "rebel/model.hpp"
#include "rebel/weak.hpp"

namespace rebel {

// Discrete binary AdaBoost over the same threshold grid and tie-breaking as
// the multi-class trainer. Class 0 maps to y* = +1, class 1 to y* = -1.

struct AdaBoostRound {
  Stump stump;
  double alpha = 0.0;
  double weighted_error = 0.0;  ///< normalized by the total weight
};

struct BinaryAdaBoostModel {
  std::vector<AdaBoostRound> rounds;

  /// h(x) = sum_t alpha_t f_t(x).
  double score(std::span<const double> x) const;
  /// Class 0 when h(x) >= 0, class 1 otherwise.
  ClassIndex predict(std::span<const double> x) const;
};

struct AdaBoostConfig {
  std::size_t rounds = 50;
  std::size_t n_tau = 200;
  /// Added to both weight sums inside the log of alpha. Unset means 1/(2N),
  /// which matches the multi-class trainer's default vote smoothing when K = 2.
  std::optional<double> smoothing;
};

/// Called after each round with the unnormalized sample weights.
using AdaBoostObserver = std::function<void(std::size_t round, const AdaBoostRound&, std::span<const double> weights)>;

/// Weights start at 1/N and are updated by D_n *= exp(-alpha y*_n f(x_n)).
/// Each round picks the (feature, threshold, polarity) with the least
/// weighted error; among candidates tied with the least (search_tied) the
/// lowest feature, threshold, then polarity +1 wins.
BinaryAdaBoostModel adaboost_train(const Dataset& data, const BinnedFeatures& binned, const AdaBoostConfig& config,
                                   const AdaBoostObserver& observer = {});
BinaryAdaBoostModel adaboost_train(const Dataset& data, const AdaBoostConfig& config);

/// First disagreement between the multi-class trainer and AdaBoost.
struct OracleDivergence {
  std::size_t round = 0;
  std::string quantity;  ///< "feature", "threshold", "a1", "a2", "H1+H2" or "rounds"
  double rebel = 0.0;
  double adaboost = 0.0;
};

/// Trains stumps with uniform costs and no a0 on a binary dataset and
/// checks each round against AdaBoost on the same grid: identical feature
/// and threshold, a_1 = polarity * alpha, a_2 = -a_1 and H_1 = -H_2 on every
/// sample, all within `tolerance`. `rebel_epsilon` overrides the trainer's
/// vote smoothing (a mismatch makes the check fail).
std::optional<OracleDivergence> compare_with_adaboost(const Dataset& data, std::size_t rounds, std::size_t n_tau,
                                                      double tolerance,
                                                      std::optional<double> rebel_epsilon = std::nullopt);

struct PosteriorEstimate {
  std::vector<double> probs;
};

/// softmax(2 H): the class posterior implied by the exponential loss.
PosteriorEstimate posterior_from_scores(std::span<const double> scores);
PosteriorEstimate estimate_posterior(const StrongClassifier& model, std::span<const double> x);

/// argmin_k sum_y p(y) c_{y,k}; ties to the lowest index.
ClassIndex two_step_predict(const PosteriorEstimate& posterior, const CostMatrix& costs);

}  // namespace rebel
