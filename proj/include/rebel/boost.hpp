#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rebel/costs.hpp"
#include "rebel/dataset.hpp"
#include "rebel/model.hpp"
#include "rebel/weak.hpp"
#include "rebel/weights.hpp"

namespace rebel {

struct TrainConfig {
  std::size_t rounds = 100;
  int tree_depth = 1;
  std::size_t n_tau = 200;
  /// Vote smoothing; unset means 1 / (2 N K).
  std::optional<double> epsilon;
  bool fit_a0 = true;
  std::uint64_t seed = 0;
  bool early_stop_on_certificate = true;
  unsigned workers = 1;

  void validate() const;
  double resolve_epsilon(std::size_t samples, int classes) const;
  /// Hash of the settings that shape the model.
  std::uint64_t fingerprint() const;
};

enum class StopReason { RoundBudget, Certificate, LossFloor };

const char* to_string(StopReason reason);

struct RoundRecord {
  std::size_t round = 0;
  double loss = 0.0;
  double loss_excess = 0.0;  ///< loss - L*
  std::optional<double> gamma;
  std::optional<double> phi;
  double train_error = 0.0;
  double train_risk = 0.0;
  std::string features;  ///< nodes of the chosen learner, "f<j>><threshold>" joined by ';'
};

struct TrainTrace {
  double l_star = 0.0;
  double l_bullet = 0.0;
  double mean_c_star = 0.0;  ///< (1/2N) sum_n c*_n
  double initial_loss = 0.0; ///< loss before the first round (after a0)
  double initial_error = 0.0;
  double initial_risk = 0.0;
  std::vector<RoundRecord> rounds;
  StopReason stop = StopReason::RoundBudget;
};

struct TrainResult {
  StrongClassifier model;
  TrainTrace trace;
  WeightState weights;  ///< final incremental weights
};

/// Called after every completed round with the model so far.
using RoundObserver =
    std::function<void(std::size_t round, const StrongClassifier& model, const WeightState& weights)>;

/// w+ = c+, w- = c- (zero scores).
WeightState init_weights(const Dataset& data, const CostMatrix& costs);

/// Recomputes weights from the model's scores: c+- * exp(+-H(x)).
WeightState weights_from_model(const StrongClassifier& model, const Dataset& data, const CostMatrix& costs);

/// Closed-form vote of the constant learner f = +1; applies it to `weights`.
std::vector<double> fit_constant(WeightState& weights, double epsilon);

/// w+ *= exp(f a), w- *= exp(-f a). Throws NumericRangeError carrying
/// `round` when a vote is not finite or an entry leaves [0, 1e300].
void update_weights(WeightState& weights, std::span<const std::int8_t> outputs, std::span<const double> a,
                    std::size_t round);
void update_weights(WeightState& weights, const Tree& f, std::span<const double> a, const Dataset& data,
                    std::size_t round);

/// Surrogate loss implied by weights: mean beta + (1/2N) sum <w+ + w-, 1>.
double loss_from_weights(const WeightState& weights, const Dataset& data, const CostMatrix& costs);

struct Edge {
  std::optional<double> gamma;
  std::optional<double> phi;
};

/// gamma = <|s+ - s-|, 1> / (<s+ + s-, 1> - c*), phi = gamma (1 - c* / (L. - L* + c*)).
Edge edge(const SplitScores& s, double mean_c_star, const LossFloor& floor);

/// <|sum_n (w+_n - w-_n) f(x_n)|, 1>, the left side of the weak learning condition.
double wlc_condition_value(const WeightState& weights, std::span<const std::int8_t> outputs);

struct Prediction {
  ClassIndex label = 0;
  std::vector<double> scores;
};

Prediction predict(const StrongClassifier& model, std::span<const double> x);

/// Greedy stagewise training. Each round: stump search, grow to the target
/// depth, fit the vote, update weights.
TrainResult train(const Dataset& data, const CostMatrix& costs, const TrainConfig& config,
                  const RoundObserver& observer = {});

}  // namespace rebel
