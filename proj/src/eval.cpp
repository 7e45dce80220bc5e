#include "rebel/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rebel/error.hpp"
#include "rebel/loss.hpp"
#include "rebel/matrix.hpp"
#include "rebel/parallel.hpp"

namespace rebel {
namespace {

void check_labels(const StrongClassifier& model, const Dataset& data, const CostMatrix& costs) {
  data.validate();
  if (costs.num_classes() != model.num_classes)
    throw InputError("cost matrix has " + std::to_string(costs.num_classes()) + " classes, model has " +
                     std::to_string(model.num_classes));
  if (data.num_classes > model.num_classes) throw InputError("dataset has more classes than the model");
  if (data.dims() != model.num_features)
    throw InputError("dataset has " + std::to_string(data.dims()) + " features, model expects " +
                     std::to_string(model.num_features));
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {}

std::size_t ConfusionMatrix::operator()(ClassIndex truth, ClassIndex predicted) const {
  return counts_.at(static_cast<std::size_t>(truth * classes_ + predicted));
}

void ConfusionMatrix::add(ClassIndex truth, ClassIndex predicted) {
  if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_)
    throw InputError("class index out of range for the confusion matrix");
  ++counts_[static_cast<std::size_t>(truth * classes_ + predicted)];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (auto c : counts_) sum += c;
  return sum;
}

std::size_t ConfusionMatrix::row_total(ClassIndex truth) const {
  std::size_t sum = 0;
  for (ClassIndex k = 0; k < classes_; ++k) sum += (*this)(truth, k);
  return sum;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t sum = 0;
  for (ClassIndex k = 0; k < classes_; ++k) sum += (*this)(k, k);
  return sum;
}

double risk_from_confusion(const ConfusionMatrix& confusion, const CostMatrix& costs) {
  const std::size_t n = confusion.total();
  if (n == 0) throw InputError("empty confusion matrix");
  double sum = 0.0;
  for (ClassIndex y = 0; y < confusion.num_classes(); ++y)
    for (ClassIndex k = 0; k < confusion.num_classes(); ++k)
      sum += static_cast<double>(confusion(y, k)) * costs(y, k);
  return sum / static_cast<double>(n);
}

Evaluation evaluate_predictions(std::span<const ClassIndex> predictions, std::span<const ClassIndex> labels,
                                const CostMatrix& costs) {
  Evaluation out{ConfusionMatrix(costs.num_classes())};
  out.risk = empirical_risk(predictions, labels, costs);
  for (std::size_t n = 0; n < labels.size(); ++n) out.confusion.add(labels[n], predictions[n]);

  const double n_total = static_cast<double>(labels.size());
  out.error = static_cast<double>(out.confusion.total() - out.confusion.correct()) / n_total;
  const double check = risk_from_confusion(out.confusion, costs);
  if (std::abs(check - out.risk) > 1e-12 * std::max(1.0, std::abs(out.risk)))
    throw std::logic_error("risk disagrees with its confusion matrix");
  return out;
}

Evaluation evaluate(const StrongClassifier& model, const Dataset& data, const CostMatrix& costs, unsigned workers) {
  check_labels(model, data, costs);
  std::vector<ClassIndex> predictions(data.size());
  parallel_for(data.size(), workers, [&](std::size_t n) { predictions[n] = model.predict(data.sample(n)); });
  return evaluate_predictions(predictions, data.labels, costs);
}

std::uint64_t cost_checksum(const CostMatrix& costs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : costs.entries().values()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 64; b += 8) {
      h ^= (bits >> b) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string format_report(const Evaluation& evaluation, const CostMatrix& costs) {
  const auto& cm = evaluation.confusion;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (ClassIndex y = 0; y < cm.num_classes(); ++y) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (ClassIndex k = 0; k < cm.num_classes(); ++k) row.push_back(cm(y, k));
    rows.push_back(std::move(row));
  }
  char checksum[17];
  std::snprintf(checksum, sizeof checksum, "%016llx", static_cast<unsigned long long>(cost_checksum(costs)));

  nlohmann::ordered_json report;
  report["error"] = evaluation.error;
  report["risk"] = evaluation.risk;
  report["K"] = cm.num_classes();
  report["N"] = cm.total();
  report["cost_checksum"] = checksum;
  report["confusion"] = std::move(rows);
  return report.dump(2);
}

std::size_t select_rounds_from_curve(std::span<const double> risks) {
  if (risks.empty()) throw InputError("empty risk curve");
  std::size_t best = 0;
  for (std::size_t t = 1; t < risks.size(); ++t)
    if (risks[t] < risks[best]) best = t;
  return best;
}

RoundSelection select_rounds(const StrongClassifier& model, const Dataset& validation, const CostMatrix& costs,
                             unsigned workers) {
  if (validation.size() == 0) throw InputError("empty validation set");
  check_labels(model, validation, costs);
  const std::size_t n_count = validation.size();
  const auto k_count = static_cast<std::size_t>(model.num_classes);

  Matrix scores(n_count, k_count);
  std::vector<ClassIndex> predictions(n_count);
  for (std::size_t n = 0; n < n_count; ++n) {
    for (std::size_t k = 0; k < k_count; ++k) scores(n, k) = model.a0.empty() ? 0.0 : model.a0[k];
    predictions[n] = argmax_class(scores.row(n));
  }

  RoundSelection out;
  out.risks.reserve(model.rounds.size() + 1);
  out.risks.push_back(empirical_risk(predictions, validation.labels, costs));
  for (const auto& round : model.rounds) {
    parallel_for(n_count, workers, [&](std::size_t n) {
      const double f = round.learner(validation.sample(n));
      auto row = scores.row(n);
      for (std::size_t k = 0; k < k_count; ++k) row[k] += f * round.vote[k];
      predictions[n] = argmax_class(row);
    });
    out.risks.push_back(empirical_risk(predictions, validation.labels, costs));
  }
  out.best_rounds = select_rounds_from_curve(out.risks);
  out.best_risk = out.risks[out.best_rounds];
  return out;
}

}  // namespace rebel
