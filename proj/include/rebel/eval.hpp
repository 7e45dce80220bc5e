#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rebel/costs.hpp"
#include "rebel/dataset.hpp"
#include "rebel/model.hpp"

namespace rebel {

/// Cell (y, k) counts samples of true class y predicted as k.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 0);

  int num_classes() const noexcept { return classes_; }
  std::size_t operator()(ClassIndex truth, ClassIndex predicted) const;
  void add(ClassIndex truth, ClassIndex predicted);

  std::size_t total() const;
  std::size_t row_total(ClassIndex truth) const;
  std::size_t correct() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int classes_;
  std::vector<std::size_t> counts_;
};

struct Evaluation {
  ConfusionMatrix confusion;
  double error = 0.0;
  double risk = 0.0;
};

/// Builds the confusion matrix, error and risk. The risk is computed per
/// sample and from the confusion matrix; a disagreement beyond rounding
/// throws std::logic_error.
Evaluation evaluate_predictions(std::span<const ClassIndex> predictions, std::span<const ClassIndex> labels,
                                const CostMatrix& costs);
Evaluation evaluate(const StrongClassifier& model, const Dataset& data, const CostMatrix& costs,
                    unsigned workers = 1);

/// (1/N) sum_{y,k} confusion(y, k) c_{y,k}.
double risk_from_confusion(const ConfusionMatrix& confusion, const CostMatrix& costs);

/// FNV-1a over the bit patterns of the cost entries, row-major.
std::uint64_t cost_checksum(const CostMatrix& costs);

/// JSON object with error, risk, confusion rows, K, N and the cost checksum.
std::string format_report(const Evaluation& evaluation, const CostMatrix& costs);

struct RoundSelection {
  std::size_t best_rounds = 0;
  double best_risk = 0.0;
  std::vector<double> risks;  ///< risks[T] is the validation risk of the first T rounds
};

/// Index of the smallest entry; ties go to the smallest index.
std::size_t select_rounds_from_curve(std::span<const double> risks);

/// Validation risk of every prefix T = 0..rounds, scored incrementally.
/// Throws InputError on an empty validation set.
RoundSelection select_rounds(const StrongClassifier& model, const Dataset& validation, const CostMatrix& costs,
                             unsigned workers = 1);

}  // namespace rebel
