#include "rebel/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rebel/error.hpp"

namespace rebel {
namespace {

constexpr double kDiagonalTolerance = 1e-12;

std::string cell(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")";
}

}  // namespace

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
  const std::size_t k = entries_.rows();
  if (k < 2) throw InputError("cost matrix needs at least 2 classes");
  if (entries_.cols() != k)
    throw InputError("cost matrix is " + std::to_string(k) + "x" + std::to_string(entries_.cols()) +
                     ", expected square");
  for (std::size_t y = 0; y < k; ++y) {
    bool any_positive = false;
    for (std::size_t j = 0; j < k; ++j) {
      double& v = entries_(y, j);
      if (!std::isfinite(v)) throw InputError("non-finite cost at " + cell(y, j));
      if (y == j) {
        if (std::abs(v) > kDiagonalTolerance)
          throw InputError("nonzero diagonal cost at " + cell(y, j));
        v = 0.0;
        continue;
      }
      if (v < 0.0) throw InputError("negative cost at " + cell(y, j));
      any_positive = any_positive || v > 0.0;
    }
    if (!any_positive)
      throw InputError("class " + std::to_string(y + 1) + " has no positive misclassification cost");
  }
}

CostMatrix CostMatrix::uniform(int num_classes) {
  if (num_classes < 2) throw InputError("cost matrix needs at least 2 classes");
  const auto k = static_cast<std::size_t>(num_classes);
  Matrix m(k, k, 1.0);
  for (std::size_t y = 0; y < k; ++y) m(y, y) = 0.0;
  return CostMatrix(std::move(m));
}

CostMatrix CostMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw InputError("cost scale factor must be positive and finite");
  Matrix m = entries_;
  for (double& v : m.values()) v *= factor;
  return CostMatrix(std::move(m));
}

CostDecomposition decompose_row(std::span<const double> row) {
  if (row.empty()) throw InputError("empty cost row");
  for (double v : row)
    if (!std::isfinite(v) || v < 0.0) throw InputError("cost row entries must be finite and >= 0");
  const double phi = *std::max_element(row.begin(), row.end());
  if (phi <= 0.0) throw InputError("degenerate cost row (all zeros)");

  const double k = static_cast<double>(row.size());
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  CostDecomposition out;
  out.phi = phi;
  out.beta = total - (k - 1.0) * phi;
  out.b.reserve(row.size());
  for (double v : row) out.b.push_back(phi - v);
  return out;
}

SampleCostTerms sample_terms(const CostMatrix& costs, ClassIndex truth) {
  if (truth < 0 || truth >= costs.num_classes())
    throw InputError("class index " + std::to_string(truth) + " out of range");
  const auto row = costs.row(truth);
  const CostDecomposition dec = decompose_row(row);

  SampleCostTerms t;
  t.beta = dec.beta;
  t.c_plus.reserve(row.size());
  t.c_minus.reserve(row.size());
  t.h_star.reserve(row.size());
  for (double c : row) {
    // c - beta >= 0 holds mathematically; clamp rounding residue at zero.
    const double plus = std::max(0.0, c - dec.beta);
    const double minus = dec.phi - c;
    t.c_plus.push_back(plus);
    t.c_minus.push_back(minus);
    t.c_star += 2.0 * std::sqrt(plus * minus);
    t.h_star.push_back(0.5 * (std::log(minus) - std::log(plus)));
  }
  return t;
}

std::vector<SampleCostTerms> class_terms(const CostMatrix& costs) {
  std::vector<SampleCostTerms> out;
  out.reserve(static_cast<std::size_t>(costs.num_classes()));
  for (ClassIndex y = 0; y < costs.num_classes(); ++y) out.push_back(sample_terms(costs, y));
  return out;
}

LossFloor loss_floor(const CostMatrix& costs, std::span<const ClassIndex> labels) {
  if (costs.num_classes() < 2) throw InputError("loss floor needs K >= 2");
  if (labels.empty()) throw InputError("loss floor needs at least one sample");
  const auto terms = class_terms(costs);
  const int k_count = costs.num_classes();

  double total = 0.0;
  std::vector<bool> present(static_cast<std::size_t>(k_count), false);
  for (ClassIndex y : labels) {
    if (y < 0 || y >= k_count) throw InputError("label out of range");
    const auto& t = terms[static_cast<std::size_t>(y)];
    total += t.beta + 0.5 * t.c_star;
    present[static_cast<std::size_t>(y)] = true;
  }
  const double n = static_cast<double>(labels.size());

  // Smallest per-sample excess of a score vector that ties the true class
  // with a costly competitor; zero-cost confusions never add risk.
  double gap = std::numeric_limits<double>::infinity();
  for (ClassIndex y = 0; y < k_count; ++y) {
    if (!present[static_cast<std::size_t>(y)]) continue;
    const auto& t = terms[static_cast<std::size_t>(y)];
    const auto yi = static_cast<std::size_t>(y);
    for (std::size_t k = 0; k < t.c_plus.size(); ++k) {
      if (k == yi || costs(y, static_cast<ClassIndex>(k)) <= 0.0) continue;
      const double joint = 2.0 * std::sqrt((t.c_plus[yi] + t.c_plus[k]) * (t.c_minus[yi] + t.c_minus[k]));
      const double apart =
          2.0 * std::sqrt(t.c_plus[yi] * t.c_minus[yi]) + 2.0 * std::sqrt(t.c_plus[k] * t.c_minus[k]);
      gap = std::min(gap, joint - apart);
    }
  }

  LossFloor f;
  f.l_star = total / n;
  f.l_bullet = f.l_star + gap / (2.0 * n);
  return f;
}

double expected_random_cost(const CostMatrix& costs, std::span<const ClassIndex> labels) {
  if (labels.empty()) throw InputError("expected cost needs at least one label");
  const double k = static_cast<double>(costs.num_classes());
  double total = 0.0;
  for (ClassIndex y : labels) {
    if (y < 0 || y >= costs.num_classes()) throw InputError("label out of range");
    const auto row = costs.row(y);
    total += std::accumulate(row.begin(), row.end(), 0.0) / k;
  }
  return total / static_cast<double>(labels.size());
}

CostMatrix normalize_random_unit(const CostMatrix& costs, std::span<const ClassIndex> labels) {
  const double expected = expected_random_cost(costs, labels);
  if (!(expected > 0.0)) throw InputError("random guessing has zero expected cost");
  // Already unit to machine precision: keep the matrix bit-identical.
  if (std::abs(expected - 1.0) <= 1e-15) return costs;
  return costs.scaled(1.0 / expected);
}

}  // namespace rebel
