#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rebel/dataset.hpp"
#include "rebel/weak.hpp"

namespace rebel {

/// One boosting round: a binary learner and its K-dimensional vote.
struct Round {
  Tree learner;
  std::vector<double> vote;

  friend bool operator==(const Round&, const Round&) = default;
};

/// H(x) = a0 + sum_t f_t(x) * a_t; the predicted class is the argmax of H.
struct StrongClassifier {
  int num_classes = 0;
  std::size_t num_features = 0;
  std::vector<double> a0;
  std::vector<Round> rounds;
  std::vector<std::string> label_names;
  std::uint64_t config_fingerprint = 0;

  StrongClassifier() = default;
  StrongClassifier(int classes, std::size_t features);

  /// Writes H(x) into out (size K). Throws InputError on dimension mismatch.
  void scores(std::span<const double> x, std::span<double> out) const;
  std::vector<double> scores(std::span<const double> x) const;
  ClassIndex predict(std::span<const double> x) const;

  /// The model truncated to its first `count` rounds.
  StrongClassifier prefix(std::size_t count) const;

  friend bool operator==(const StrongClassifier&, const StrongClassifier&) = default;
};

/// Index of the largest score; the lowest index wins ties.
ClassIndex argmax_class(std::span<const double> scores);

}  // namespace rebel
