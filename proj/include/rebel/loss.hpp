#pragma once

#include <span>

#include "rebel/costs.hpp"
#include "rebel/dataset.hpp"
#include "rebel/matrix.hpp"
#include "rebel/model.hpp"

namespace rebel {

/// 0.5 * (exp(-H_y) + sum_{k != y} exp(H_k)); upper-bounds the 0-1 error of
/// argmax(H) against y.
double coupled_sum(std::span<const double> scores, ClassIndex truth);

struct LossReport {
  double surrogate = 0.0;   ///< exponential surrogate of the risk
  double l_star = 0.0;      ///< its infimum over all score functions
  double excess = 0.0;      ///< surrogate - l_star
  double error_rate = 0.0;  ///< fraction of argmax mistakes
  double risk = 0.0;        ///< mean misclassification cost
};

/// Loss of explicit per-sample scores (N x K).
LossReport surrogate_from_scores(const Matrix& scores, std::span<const ClassIndex> labels,
                                 const CostMatrix& costs, unsigned workers = 1);

/// Scores every sample from the model, independent of any training state.
LossReport surrogate_loss(const StrongClassifier& model, const Dataset& data, const CostMatrix& costs,
                          unsigned workers = 1);

/// (1/N) sum_n c_{y_n, yhat_n}.
double empirical_risk(std::span<const ClassIndex> predictions, std::span<const ClassIndex> labels,
                      const CostMatrix& costs);

}  // namespace rebel
