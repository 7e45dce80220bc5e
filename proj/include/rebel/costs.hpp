#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rebel/dataset.hpp"
#include "rebel/matrix.hpp"

namespace rebel {

/// K x K misclassification costs. Entry (y, k) is the cost of predicting k
/// when the truth is y. Nonnegative, zero diagonal, and every row has at
/// least one strictly positive entry.
class CostMatrix {
 public:
  /// Validates `entries`. Diagonal values within 1e-12 of zero are forced to
  /// exactly zero; anything else off the rules throws InputError.
  explicit CostMatrix(Matrix entries);

  /// 0-1 costs.
  static CostMatrix uniform(int num_classes);

  int num_classes() const noexcept { return static_cast<int>(entries_.rows()); }
  double operator()(ClassIndex truth, ClassIndex predicted) const {
    return entries_(static_cast<std::size_t>(truth), static_cast<std::size_t>(predicted));
  }
  std::span<const double> row(ClassIndex truth) const {
    return entries_.row(static_cast<std::size_t>(truth));
  }
  const Matrix& entries() const noexcept { return entries_; }

  CostMatrix scaled(double factor) const;

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

 private:
  Matrix entries_;
};

/// Minimal decomposition c_y = beta*1 + sum_k b_k (1 - delta_k), b >= 0.
struct CostDecomposition {
  double beta = 0.0;
  std::vector<double> b;
  double phi = 0.0;  ///< max_k c_yk
};

CostDecomposition decompose_row(std::span<const double> row);

/// Per-class cost vectors that weight the exponential terms of the loss.
struct SampleCostTerms {
  std::vector<double> c_plus;   ///< c_y - beta_y * 1
  std::vector<double> c_minus;  ///< max(c_y) * 1 - c_y
  double c_star = 0.0;          ///< 2 * sum_k sqrt(c_plus_k * c_minus_k)
  double beta = 0.0;
  /// Per-sample optimal score 0.5 * (ln c_minus - ln c_plus); entries may be +-inf.
  std::vector<double> h_star;
};

SampleCostTerms sample_terms(const CostMatrix& costs, ClassIndex truth);

/// sample_terms for every class, indexed by class.
std::vector<SampleCostTerms> class_terms(const CostMatrix& costs);

struct LossFloor {
  double l_star = 0.0;    ///< infimum of the surrogate loss
  double l_bullet = 0.0;  ///< surrogate below this certifies zero training risk
};

/// L* and the zero-risk certificate L. for a labelled sample.
LossFloor loss_floor(const CostMatrix& costs, std::span<const ClassIndex> labels);

/// (1/N) sum_n (1/K) sum_k c_{y_n, k}: the expected cost of uniform guessing.
double expected_random_cost(const CostMatrix& costs, std::span<const ClassIndex> labels);

/// Rescales so that uniform random guessing on `labels` costs exactly 1.
CostMatrix normalize_random_unit(const CostMatrix& costs, std::span<const ClassIndex> labels);

}  // namespace rebel
