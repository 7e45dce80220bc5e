#include "rebel/weak.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rebel/error.hpp"
#include "rebel/parallel.hpp"

namespace rebel {
namespace {

std::size_t node_count(int depth) { return (std::size_t{1} << depth) - 1; }

// exp-weighted term of one coordinate; zero weight contributes nothing even
// when the vote is infinite.
double coordinate_loss(double s_plus, double s_minus, double a) {
  double g = 0.0;
  if (s_plus > 0.0) g += s_plus * std::exp(a);
  if (s_minus > 0.0) g += s_minus * std::exp(-a);
  return g;
}

double criterion(std::span<const double> s_plus, std::span<const double> s_minus) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s_plus.size(); ++k) acc += std::sqrt(s_plus[k] * s_minus[k]);
  return 2.0 * acc;
}

struct FeatureScan {
  std::vector<double> values;  ///< criterion per threshold; empty for a constant feature
  SplitScores scores;          ///< at the requested threshold
};

FeatureScan scan_feature(const BinnedFeatures& binned, const WeightState& w, std::size_t j,
                         std::size_t keep = std::numeric_limits<std::size_t>::max()) {
  FeatureScan out;
  if (binned.grid().constant[j]) return out;

  const std::size_t k_count = w.num_classes();
  const std::size_t buckets = binned.bucket_count(j);
  const std::size_t n_tau = buckets - 1;
  const auto bins = binned.feature(j);

  Matrix bucket_plus(buckets, k_count);
  Matrix bucket_minus(buckets, k_count);
  for (std::size_t n = 0; n < bins.size(); ++n) {
    auto bp = bucket_plus.row(bins[n]);
    auto bm = bucket_minus.row(bins[n]);
    const auto wp = w.plus.row(n);
    const auto wm = w.minus.row(n);
    for (std::size_t k = 0; k < k_count; ++k) {
      bp[k] += wp[k];
      bm[k] += wm[k];
    }
  }

  // right side of threshold i is buckets i+1..n_tau
  Matrix right_plus(n_tau, k_count);
  Matrix right_minus(n_tau, k_count);
  for (std::size_t i = n_tau; i-- > 0;) {
    for (std::size_t k = 0; k < k_count; ++k) {
      const double next_p = i + 1 < n_tau ? right_plus(i + 1, k) : 0.0;
      const double next_m = i + 1 < n_tau ? right_minus(i + 1, k) : 0.0;
      right_plus(i, k) = next_p + bucket_plus(i + 1, k);
      right_minus(i, k) = next_m + bucket_minus(i + 1, k);
    }
  }

  const double scale = 2.0 * static_cast<double>(w.size());
  std::vector<double> left_plus(k_count, 0.0), left_minus(k_count, 0.0);
  std::vector<double> sp(k_count), sm(k_count);
  out.values.resize(n_tau);
  for (std::size_t i = 0; i < n_tau; ++i) {
    for (std::size_t k = 0; k < k_count; ++k) {
      left_plus[k] += bucket_plus(i, k);
      left_minus[k] += bucket_minus(i, k);
      sp[k] = (right_plus(i, k) + left_minus[k]) / scale;
      sm[k] = (right_minus(i, k) + left_plus[k]) / scale;
    }
    out.values[i] = criterion(sp, sm);
    if (i == keep) out.scores = SplitScores{sp, sm};
  }
  return out;
}

struct LeafBest {
  double cost = std::numeric_limits<double>::infinity();
  Stump stump;
  bool found = false;
};

// Cheapest stump for one leaf, where routing sample n to +1 costs u[n] and
// to -1 costs v[n].
LeafBest scan_leaf_feature(const BinnedFeatures& binned, std::span<const std::size_t> members,
                           std::span<const double> u, std::span<const double> v, std::size_t j) {
  LeafBest best;
  if (binned.grid().constant[j]) return best;
  const auto& thresholds = binned.grid().thresholds[j];
  const std::size_t buckets = binned.bucket_count(j);
  const std::size_t n_tau = buckets - 1;
  const auto bins = binned.feature(j);

  std::vector<double> bu(buckets, 0.0), bv(buckets, 0.0);
  for (std::size_t n : members) {
    bu[bins[n]] += u[n];
    bv[bins[n]] += v[n];
  }
  std::vector<double> ru(n_tau), rv(n_tau);
  double acc_u = 0.0, acc_v = 0.0;
  for (std::size_t i = n_tau; i-- > 0;) {
    acc_u += bu[i + 1];
    acc_v += bv[i + 1];
    ru[i] = acc_u;
    rv[i] = acc_v;
  }
  double lu = 0.0, lv = 0.0;
  for (std::size_t i = 0; i < n_tau; ++i) {
    lu += bu[i];
    lv += bv[i];
    const double pos = ru[i] + lv;  // right side outputs +1
    const double neg = rv[i] + lu;  // right side outputs -1
    if (pos < best.cost) {
      best = {pos, Stump{j, thresholds[i], 1}, true};
    }
    if (neg < best.cost) {
      best = {neg, Stump{j, thresholds[i], -1}, true};
    }
  }
  return best;
}

}  // namespace

Tree::Tree(Stump root) : depth_(1), nodes_{root} {}

Tree::Tree(int depth, std::vector<Stump> nodes) : depth_(depth), nodes_(std::move(nodes)) {
  if (depth_ < 1 || depth_ > 30) throw InputError("tree depth must be in 1..30");
  if (nodes_.size() != node_count(depth_))
    throw InputError("depth-" + std::to_string(depth_) + " tree needs " +
                     std::to_string(node_count(depth_)) + " nodes, got " +
                     std::to_string(nodes_.size()));
  for (const auto& s : nodes_)
    if (s.polarity != 1 && s.polarity != -1) throw InputError("stump polarity must be +1 or -1");
}

std::size_t Tree::leaf_node(std::span<const double> x) const {
  std::size_t i = 0;
  for (int level = 0; level + 1 < depth_; ++level) i = nodes_[i](x) > 0 ? 2 * i + 2 : 2 * i + 1;
  return i;
}

int Tree::operator()(std::span<const double> x) const { return nodes_[leaf_node(x)](x); }

Tree Tree::deepened() const {
  std::vector<Stump> nodes = nodes_;
  nodes.resize(node_count(depth_ + 1));
  const std::size_t first_leaf = node_count(depth_ - 1);
  for (std::size_t leaf = first_leaf; leaf < nodes_.size(); ++leaf) {
    nodes[2 * leaf + 1] = nodes_[leaf];
    nodes[2 * leaf + 2] = nodes_[leaf];
  }
  return Tree(depth_ + 1, std::move(nodes));
}

Tree Tree::with_node(std::size_t index, Stump stump) const {
  Tree out = *this;
  out.nodes_.at(index) = stump;
  return out;
}

ThresholdGrid build_grid(const Dataset& data, std::size_t n_tau) {
  if (data.size() == 0) throw InputError("cannot build thresholds for an empty dataset");
  if (n_tau == 0) throw InputError("threshold count must be >= 1");
  ThresholdGrid grid;
  const std::size_t d = data.dims();
  grid.thresholds.resize(d);
  grid.constant.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = data.features(0, j), hi = lo;
    for (std::size_t n = 1; n < data.size(); ++n) {
      lo = std::min(lo, data.features(n, j));
      hi = std::max(hi, data.features(n, j));
    }
    auto& t = grid.thresholds[j];
    if (lo == hi) {
      grid.constant[j] = true;
      t.push_back(lo);
      continue;
    }
    const double range = hi - lo;
    const double steps = static_cast<double>(n_tau + 1);
    t.reserve(n_tau);
    for (std::size_t i = 1; i <= n_tau; ++i) {
      const double tau = lo + range * static_cast<double>(i) / steps;
      if (t.empty() || tau > t.back()) t.push_back(tau);
    }
  }
  return grid;
}

BinnedFeatures::BinnedFeatures(const Dataset& data, ThresholdGrid grid)
    : grid_(std::move(grid)), samples_(data.size()) {
  if (grid_.dims() != data.dims()) throw InputError("threshold grid does not match dataset features");
  bins_.resize(samples_ * grid_.dims());
  for (std::size_t j = 0; j < grid_.dims(); ++j) {
    const auto& t = grid_.thresholds[j];
    for (std::size_t n = 0; n < samples_; ++n) {
      const double x = data.features(n, j);
      bins_[j * samples_ + n] =
          static_cast<std::uint32_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
    }
  }
}

SplitScores accumulate_split(std::span<const std::int8_t> outputs, const WeightState& weights) {
  const std::size_t k_count = weights.num_classes();
  std::vector<double> plus(k_count, 0.0), minus(k_count, 0.0);
  for (std::size_t n = 0; n < outputs.size(); ++n) {
    const auto wp = weights.plus.row(n);
    const auto wm = weights.minus.row(n);
    const bool pos = outputs[n] > 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      plus[k] += pos ? wp[k] : wm[k];
      minus[k] += pos ? wm[k] : wp[k];
    }
  }
  const double scale = 2.0 * static_cast<double>(weights.size());
  for (std::size_t k = 0; k < k_count; ++k) {
    plus[k] /= scale;
    minus[k] /= scale;
  }
  return {std::move(plus), std::move(minus)};
}

std::vector<std::int8_t> evaluate_outputs(const Tree& f, const Dataset& data) {
  std::vector<std::int8_t> out(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) out[n] = static_cast<std::int8_t>(f(data.sample(n)));
  return out;
}

SplitScores accumulate_split(const Tree& f, const Dataset& data, const WeightState& weights) {
  return accumulate_split(evaluate_outputs(f, data), weights);
}

SplitScores accumulate_split(const Stump& f, const Dataset& data, const WeightState& weights) {
  return accumulate_split(Tree(f), data, weights);
}

VectorFit optimal_vector(const SplitScores& s, double epsilon) {
  VectorFit fit;
  fit.a.resize(s.s_plus.size());
  for (std::size_t k = 0; k < s.s_plus.size(); ++k) {
    const double num = s.s_minus[k] + epsilon;
    const double den = s.s_plus[k] + epsilon;
    fit.a[k] = num == den ? 0.0 : 0.5 * (std::log(num) - std::log(den));
  }
  fit.loss_excess = criterion(s.s_plus, s.s_minus);
  return fit;
}

double split_loss(const SplitScores& s, std::span<const double> a) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) total += coordinate_loss(s.s_plus[k], s.s_minus[k], a[k]);
  return total;
}

StumpChoice stump_search(const BinnedFeatures& binned, const WeightState& weights, double epsilon,
                         unsigned workers) {
  const std::size_t d = binned.dims();
  std::vector<FeatureScan> per_feature(d);
  parallel_for(d, workers, [&](std::size_t j) { per_feature[j] = scan_feature(binned, weights, j); });

  double best_value = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& f : per_feature) {
    for (double v : f.values) best_value = std::min(best_value, v);
    any = any || !f.values.empty();
  }
  if (!any) throw InputError("every feature is constant; no split is possible");

  std::size_t best_j = 0, best_i = 0;
  bool placed = false;
  for (std::size_t j = 0; j < d && !placed; ++j) {
    for (std::size_t i = 0; i < per_feature[j].values.size(); ++i) {
      if (search_tied(per_feature[j].values[i], best_value)) {
        best_j = j;
        best_i = i;
        placed = true;
        break;
      }
    }
  }

  StumpChoice out;
  out.stump = Stump{best_j, binned.grid().thresholds[best_j][best_i], 1};
  out.threshold_index = best_i;
  out.scores = scan_feature(binned, weights, best_j, best_i).scores;
  VectorFit fit = optimal_vector(out.scores, epsilon);
  out.a = std::move(fit.a);
  out.loss_excess = fit.loss_excess;
  return out;
}

StumpChoice stump_search(const Dataset& data, const WeightState& weights, const ThresholdGrid& grid,
                         double epsilon, unsigned workers) {
  return stump_search(BinnedFeatures(data, grid), weights, epsilon, workers);
}

GrowResult grow_layer(const Tree& tree, std::span<const double> a, const Dataset& data,
                      const BinnedFeatures& binned, const WeightState& weights, double epsilon,
                      unsigned workers) {
  const std::size_t n_count = data.size();
  const std::size_t k_count = weights.num_classes();
  if (a.size() != k_count) throw InputError("vote vector size does not match class count");

  // Step 1.
  const Tree copied = tree.deepened();
  const std::size_t first_new = node_count(tree.depth());
  const std::size_t leaves = std::size_t{1} << tree.depth();

  std::vector<std::vector<std::size_t>> members(leaves);
  for (std::size_t n = 0; n < n_count; ++n) {
    const auto x = data.sample(n);
    const std::size_t old_leaf = tree.leaf_node(x);
    const std::size_t child = tree.nodes()[old_leaf](x) > 0 ? 2 * old_leaf + 2 : 2 * old_leaf + 1;
    members[child - first_new].push_back(n);
  }

  std::vector<double> exp_a(k_count), exp_neg_a(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    exp_a[k] = std::exp(a[k]);
    exp_neg_a[k] = std::exp(-a[k]);
  }
  std::vector<double> u(n_count), v(n_count);
  for (std::size_t n = 0; n < n_count; ++n) {
    const auto wp = weights.plus.row(n);
    const auto wm = weights.minus.row(n);
    double un = 0.0, vn = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      un += wp[k] * exp_a[k] + wm[k] * exp_neg_a[k];
      vn += wm[k] * exp_a[k] + wp[k] * exp_neg_a[k];
    }
    u[n] = un;
    v[n] = vn;
  }

  // Step 2: leaves own disjoint samples, so each is optimized on its own.
  Tree grown = copied;
  const std::size_t d = binned.dims();
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    const auto& idx = members[leaf];
    if (idx.empty()) continue;
    const Stump init = copied.nodes()[first_new + leaf];
    double init_cost = 0.0;
    for (std::size_t n : idx) init_cost += init(data.sample(n)) > 0 ? u[n] : v[n];

    std::vector<LeafBest> per_feature(d);
    parallel_for(d, workers, [&](std::size_t j) { per_feature[j] = scan_leaf_feature(binned, idx, u, v, j); });
    const LeafBest* best = nullptr;
    for (const auto& cand : per_feature)
      if (cand.found && (best == nullptr || cand.cost < best->cost)) best = &cand;
    if (best != nullptr && best->cost < init_cost) grown = grown.with_node(first_new + leaf, best->stump);
  }

  const SplitScores copied_scores = accumulate_split(copied, data, weights);
  SplitScores scores = accumulate_split(grown, data, weights);
  if (split_loss(scores, a) > split_loss(copied_scores, a)) {
    grown = copied;
    scores = copied_scores;
  }

  // Step 3.
  VectorFit fit = optimal_vector(scores, epsilon);
  std::vector<double> refit(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double smoothed = coordinate_loss(scores.s_plus[k], scores.s_minus[k], fit.a[k]);
    const double held = coordinate_loss(scores.s_plus[k], scores.s_minus[k], a[k]);
    refit[k] = smoothed <= held ? fit.a[k] : a[k];
  }

  GrowResult out{std::move(grown), std::move(refit), fit.loss_excess, 0.0, std::move(scores)};
  out.loss = split_loss(out.scores, out.a);
  return out;
}

}  // namespace rebel
