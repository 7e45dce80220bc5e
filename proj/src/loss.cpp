#include "rebel/loss.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rebel/error.hpp"
#include "rebel/parallel.hpp"

namespace rebel {

double coupled_sum(std::span<const double> scores, ClassIndex truth) {
  const auto y = static_cast<std::size_t>(truth);
  double total = std::exp(-scores[y]);
  for (std::size_t k = 0; k < scores.size(); ++k)
    if (k != y) total += std::exp(scores[k]);
  return 0.5 * total;
}

LossReport surrogate_from_scores(const Matrix& scores, std::span<const ClassIndex> labels,
                                 const CostMatrix& costs, unsigned workers) {
  const std::size_t n_count = labels.size();
  if (scores.rows() != n_count) throw InputError("score rows do not match label count");
  if (scores.cols() != static_cast<std::size_t>(costs.num_classes()))
    throw InputError("score width does not match cost matrix size");
  const auto terms = class_terms(costs);
  const LossFloor floor = loss_floor(costs, labels);

  std::vector<double> excess(n_count), wrong(n_count), cost(n_count);
  parallel_for(n_count, workers, [&](std::size_t n) {
    const auto h = scores.row(n);
    const auto& t = terms[static_cast<std::size_t>(labels[n])];
    double sum = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (t.c_plus[k] > 0.0) sum += t.c_plus[k] * std::exp(h[k]);
      if (t.c_minus[k] > 0.0) sum += t.c_minus[k] * std::exp(-h[k]);
    }
    // AM-GM makes this nonnegative; clamp rounding residue.
    excess[n] = std::max(0.0, sum - t.c_star);
    const ClassIndex predicted = argmax_class(h);
    wrong[n] = predicted != labels[n] ? 1.0 : 0.0;
    cost[n] = costs(labels[n], predicted);
  });

  const double nd = static_cast<double>(n_count);
  LossReport r;
  r.l_star = floor.l_star;
  r.excess = pairwise_sum(excess) / (2.0 * nd);
  r.surrogate = r.l_star + r.excess;
  r.error_rate = pairwise_sum(wrong) / nd;
  r.risk = pairwise_sum(cost) / nd;
  return r;
}

LossReport surrogate_loss(const StrongClassifier& model, const Dataset& data, const CostMatrix& costs,
                          unsigned workers) {
  if (model.num_features != data.dims())
    throw InputError("model expects " + std::to_string(model.num_features) + " features, data has " +
                     std::to_string(data.dims()));
  if (model.num_classes != costs.num_classes() || data.num_classes > costs.num_classes())
    throw InputError("class count mismatch between model, data and costs");
  Matrix scores(data.size(), static_cast<std::size_t>(model.num_classes));
  parallel_for(data.size(), workers, [&](std::size_t n) { model.scores(data.sample(n), scores.row(n)); });
  return surrogate_from_scores(scores, data.labels, costs, workers);
}

double empirical_risk(std::span<const ClassIndex> predictions, std::span<const ClassIndex> labels,
                      const CostMatrix& costs) {
  if (predictions.size() != labels.size())
    throw InputError("prediction count " + std::to_string(predictions.size()) + " != label count " +
                     std::to_string(labels.size()));
  if (labels.empty()) throw InputError("risk of an empty sample is undefined");
  std::vector<double> cost(labels.size());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (predictions[n] < 0 || predictions[n] >= costs.num_classes() || labels[n] < 0 ||
        labels[n] >= costs.num_classes())
      throw InputError("class index out of range at position " + std::to_string(n));
    cost[n] = costs(labels[n], predictions[n]);
  }
  return pairwise_sum(cost) / static_cast<double>(labels.size());
}

}  // namespace rebel
