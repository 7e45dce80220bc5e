#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rebel/dataset.hpp"
#include "rebel/weights.hpp"

namespace rebel {

/// f(x) = polarity * sign(x[feature] - threshold), with sign(0) = -1.
struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;

  int operator()(std::span<const double> x) const {
    const int side = x[feature] > threshold ? 1 : -1;
    return polarity * side;
  }

  friend bool operator==(const Stump&, const Stump&) = default;
};

/// Complete binary tree of stumps stored in heap order (2^D - 1 nodes).
/// A node routes to child 2i+1 on -1 and 2i+2 on +1; the deepest stump on
/// the path gives the output.
class Tree {
 public:
  explicit Tree(Stump root);
  Tree(int depth, std::vector<Stump> nodes);

  int depth() const noexcept { return depth_; }
  std::span<const Stump> nodes() const noexcept { return nodes_; }

  int operator()(std::span<const double> x) const;

  /// Heap index of the deepest node reached by x.
  std::size_t leaf_node(std::span<const double> x) const;

  /// One layer deeper, each new leaf copying its parent: same function.
  Tree deepened() const;

  Tree with_node(std::size_t index, Stump stump) const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  int depth_;
  std::vector<Stump> nodes_;
};

/// Per-feature ascending thresholds.
struct ThresholdGrid {
  std::vector<std::vector<double>> thresholds;
  std::vector<bool> constant;  ///< feature takes a single value in training

  std::size_t dims() const noexcept { return thresholds.size(); }
};

/// n_tau evenly spaced interior thresholds per feature over the training
/// range; a constant feature gets one threshold at its value.
ThresholdGrid build_grid(const Dataset& data, std::size_t n_tau);

/// Each sample's bucket per feature: the number of thresholds strictly below
/// its value, so x > threshold[i] iff i < bucket. Stored feature-major.
class BinnedFeatures {
 public:
  BinnedFeatures(const Dataset& data, ThresholdGrid grid);

  const ThresholdGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return samples_; }
  std::size_t dims() const noexcept { return grid_.dims(); }
  std::span<const std::uint32_t> feature(std::size_t j) const {
    return {bins_.data() + j * samples_, samples_};
  }
  std::size_t bucket_count(std::size_t j) const { return grid_.thresholds[j].size() + 1; }

 private:
  ThresholdGrid grid_;
  std::size_t samples_;
  std::vector<std::uint32_t> bins_;
};

/// s+ and s-: (1/2N) sums of w+/w- routed by the learner's output.
struct SplitScores {
  std::vector<double> s_plus;
  std::vector<double> s_minus;
};

SplitScores accumulate_split(std::span<const std::int8_t> outputs, const WeightState& weights);
SplitScores accumulate_split(const Tree& f, const Dataset& data, const WeightState& weights);
SplitScores accumulate_split(const Stump& f, const Dataset& data, const WeightState& weights);

std::vector<std::int8_t> evaluate_outputs(const Tree& f, const Dataset& data);

struct VectorFit {
  std::vector<double> a;
  /// 2 * sum_k sqrt(s+_k * s-_k), unsmoothed: the value of
  /// <s+, exp a> + <s-, exp -a> at the exact optimum.
  double loss_excess = 0.0;
};

/// a_k = 0.5 * ln((s-_k + eps) / (s+_k + eps)).
VectorFit optimal_vector(const SplitScores& s, double epsilon);

/// <s+, exp a> + <s-, exp -a>; the loss of (f, a) minus L* plus mean c*.
double split_loss(const SplitScores& s, std::span<const double> a);

struct StumpChoice {
  Stump stump;
  std::size_t threshold_index = 0;
  std::vector<double> a;
  double loss_excess = 0.0;
  SplitScores scores;
};

/// Candidates within this relative distance of the best criterion count as
/// tied. Sums taken in different orders differ in the last bits, so exact
/// comparison would let rounding pick among genuinely equal splits.
inline constexpr double kSearchTieTolerance = 1e-10;

inline bool search_tied(double value, double best) {
  return value <= best + kSearchTieTolerance * (best < 0.0 ? -best : best);
}

/// Exhaustive histogram search over the grid with polarity fixed to +1.
/// Picks the lowest feature, then the lowest threshold, among candidates
/// tied with the minimum. Throws InputError if every feature is constant.
StumpChoice stump_search(const BinnedFeatures& binned, const WeightState& weights, double epsilon,
                         unsigned workers = 1);
StumpChoice stump_search(const Dataset& data, const WeightState& weights, const ThresholdGrid& grid,
                         double epsilon, unsigned workers = 1);

struct GrowResult {
  Tree tree;
  std::vector<double> a;
  double loss_excess = 0.0;  ///< unsmoothed criterion of the grown tree
  double loss = 0.0;         ///< split_loss at the returned (tree, a)
  SplitScores scores;
};

/// Adds one layer to `tree`:
///  1. each leaf gets a child stump copying it (no change in output);
///  2. with `a` held fixed, every new stump is re-optimized over the full
///     grid and both polarities, kept unless a candidate is strictly better;
///  3. `a` is refit in closed form for the new tree.
/// split_loss never increases: a step-2 result that rounds worse reverts to
/// the copy, and step 3 keeps a coordinate of `a` where the smoothed refit
/// would not lower its term.
GrowResult grow_layer(const Tree& tree, std::span<const double> a, const Dataset& data,
                      const BinnedFeatures& binned, const WeightState& weights, double epsilon,
                      unsigned workers = 1);

}  // namespace rebel
