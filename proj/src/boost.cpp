#include "rebel/boost.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "rebel/error.hpp"
#include "rebel/format.hpp"
#include "rebel/loss.hpp"
#include "rebel/parallel.hpp"

namespace rebel {
namespace {

constexpr double kWeightCeiling = 1e300;
constexpr double kLossFloorTolerance = 1e-12;

class Fnv1a {
 public:
  template <typename T>
  void add(const T& value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (unsigned char b : bytes) {
      hash_ ^= b;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string describe(const Tree& tree) {
  std::string out;
  for (const auto& s : tree.nodes()) {
    if (!out.empty()) out += ';';
    if (s.polarity < 0) out += '-';
    out += 'f' + std::to_string(s.feature) + '>' + format_double(s.threshold);
  }
  return out;
}

void add_vote(Matrix& scores, std::span<const std::int8_t> outputs, std::span<const double> a) {
  for (std::size_t n = 0; n < scores.rows(); ++n) {
    auto h = scores.row(n);
    for (std::size_t k = 0; k < a.size(); ++k) h[k] += outputs[n] * a[k];
  }
}

struct ErrorAndRisk {
  double error = 0.0;
  double risk = 0.0;
};

ErrorAndRisk training_error(const Matrix& scores, const Dataset& data, const CostMatrix& costs) {
  std::vector<ClassIndex> predicted(data.size());
  std::size_t wrong = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    predicted[n] = argmax_class(scores.row(n));
    wrong += predicted[n] != data.labels[n] ? 1 : 0;
  }
  return {static_cast<double>(wrong) / static_cast<double>(data.size()),
          empirical_risk(predicted, data.labels, costs)};
}

}  // namespace

void TrainConfig::validate() const {
  if (rounds < 1) throw InputError("rounds must be >= 1");
  if (tree_depth < 1 || tree_depth > 16) throw InputError("tree depth must be in 1..16");
  if (n_tau < 1) throw InputError("threshold count must be >= 1");
  if (epsilon && (!(*epsilon >= 0.0) || !std::isfinite(*epsilon)))
    throw InputError("epsilon must be finite and >= 0");
}

double TrainConfig::resolve_epsilon(std::size_t samples, int classes) const {
  if (epsilon) return *epsilon;
  return 1.0 / (2.0 * static_cast<double>(samples) * static_cast<double>(classes));
}

std::uint64_t TrainConfig::fingerprint() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(rounds));
  h.add(static_cast<std::int64_t>(tree_depth));
  h.add(static_cast<std::uint64_t>(n_tau));
  h.add(epsilon.has_value());
  h.add(epsilon.value_or(0.0));
  h.add(fit_a0);
  h.add(seed);
  h.add(early_stop_on_certificate);
  return h.value();
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::RoundBudget: return "round_budget";
    case StopReason::Certificate: return "certificate";
    case StopReason::LossFloor: return "loss_floor";
  }
  return "unknown";
}

WeightState init_weights(const Dataset& data, const CostMatrix& costs) {
  const auto terms = class_terms(costs);
  const auto k = static_cast<std::size_t>(costs.num_classes());
  WeightState w{Matrix(data.size(), k), Matrix(data.size(), k)};
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& t = terms[static_cast<std::size_t>(data.labels[n])];
    std::copy(t.c_plus.begin(), t.c_plus.end(), w.plus.row(n).begin());
    std::copy(t.c_minus.begin(), t.c_minus.end(), w.minus.row(n).begin());
  }
  return w;
}

WeightState weights_from_model(const StrongClassifier& model, const Dataset& data, const CostMatrix& costs) {
  const auto terms = class_terms(costs);
  const auto k_count = static_cast<std::size_t>(costs.num_classes());
  WeightState w{Matrix(data.size(), k_count), Matrix(data.size(), k_count)};
  std::vector<double> h(k_count);
  for (std::size_t n = 0; n < data.size(); ++n) {
    model.scores(data.sample(n), h);
    const auto& t = terms[static_cast<std::size_t>(data.labels[n])];
    for (std::size_t k = 0; k < k_count; ++k) {
      w.plus(n, k) = t.c_plus[k] * std::exp(h[k]);
      w.minus(n, k) = t.c_minus[k] * std::exp(-h[k]);
    }
  }
  return w;
}

std::vector<double> fit_constant(WeightState& weights, double epsilon) {
  const std::vector<std::int8_t> all_positive(weights.size(), 1);
  std::vector<double> a = optimal_vector(accumulate_split(all_positive, weights), epsilon).a;
  update_weights(weights, all_positive, a, 0);
  return a;
}

void update_weights(WeightState& weights, std::span<const std::int8_t> outputs, std::span<const double> a,
                    std::size_t round) {
  const std::size_t k_count = weights.num_classes();
  std::vector<double> up(k_count), down(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!std::isfinite(a[k]))
      throw NumericRangeError(round, "vote for class " + std::to_string(k + 1) + " is not finite");
    up[k] = std::exp(a[k]);
    down[k] = std::exp(-a[k]);
  }
  for (std::size_t n = 0; n < weights.size(); ++n) {
    auto wp = weights.plus.row(n);
    auto wm = weights.minus.row(n);
    const bool pos = outputs[n] > 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      // zero weights stay zero
      if (wp[k] != 0.0) wp[k] *= pos ? up[k] : down[k];
      if (wm[k] != 0.0) wm[k] *= pos ? down[k] : up[k];
      if (!(wp[k] <= kWeightCeiling) || !(wm[k] <= kWeightCeiling))
        throw NumericRangeError(round, "weight of sample " + std::to_string(n) + ", class " +
                                           std::to_string(k + 1) + " exceeds 1e300");
    }
  }
}

void update_weights(WeightState& weights, const Tree& f, std::span<const double> a, const Dataset& data,
                    std::size_t round) {
  update_weights(weights, evaluate_outputs(f, data), a, round);
}

double loss_from_weights(const WeightState& weights, const Dataset& data, const CostMatrix& costs) {
  const auto terms = class_terms(costs);
  std::vector<double> per_sample(weights.size());
  for (std::size_t n = 0; n < weights.size(); ++n) {
    const auto wp = weights.plus.row(n);
    const auto wm = weights.minus.row(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < wp.size(); ++k) sum += wp[k] + wm[k];
    per_sample[n] = terms[static_cast<std::size_t>(data.labels[n])].beta + 0.5 * sum;
  }
  return pairwise_sum(per_sample) / static_cast<double>(weights.size());
}

Edge edge(const SplitScores& s, double mean_c_star, const LossFloor& floor) {
  double total = 0.0, spread = 0.0;
  for (std::size_t k = 0; k < s.s_plus.size(); ++k) {
    total += s.s_plus[k] + s.s_minus[k];
    spread += std::abs(s.s_plus[k] - s.s_minus[k]);
  }
  Edge e;
  const double denom = total - mean_c_star;
  if (!(denom > 0.0)) return e;
  e.gamma = spread / denom;
  e.phi = *e.gamma * (1.0 - mean_c_star / (floor.l_bullet - floor.l_star + mean_c_star));
  return e;
}

double wlc_condition_value(const WeightState& weights, std::span<const std::int8_t> outputs) {
  const std::size_t k_count = weights.num_classes();
  std::vector<double> net(k_count, 0.0);
  for (std::size_t n = 0; n < weights.size(); ++n)
    for (std::size_t k = 0; k < k_count; ++k)
      net[k] += (weights.plus(n, k) - weights.minus(n, k)) * outputs[n];
  double total = 0.0;
  for (double v : net) total += std::abs(v);
  return total;
}

Prediction predict(const StrongClassifier& model, std::span<const double> x) {
  Prediction p;
  p.scores = model.scores(x);
  p.label = argmax_class(p.scores);
  return p;
}

TrainResult train(const Dataset& data, const CostMatrix& costs, const TrainConfig& config,
                  const RoundObserver& observer) {
  config.validate();
  data.validate();
  if (data.size() < 2) throw InputError("training needs at least 2 samples");
  if (data.num_classes > costs.num_classes())
    throw InputError("dataset has " + std::to_string(data.num_classes) + " classes, cost matrix has " +
                     std::to_string(costs.num_classes()));

  const std::size_t n_count = data.size();
  const int k_count = costs.num_classes();
  const double epsilon = config.resolve_epsilon(n_count, k_count);

  BinnedFeatures binned(data, build_grid(data, config.n_tau));
  bool any_split = false;
  for (bool c : binned.grid().constant) any_split = any_split || !c;
  if (!any_split) throw InputError("every feature is constant; nothing to split on");

  TrainResult result;
  TrainTrace& trace = result.trace;
  const LossFloor floor = loss_floor(costs, data.labels);
  trace.l_star = floor.l_star;
  trace.l_bullet = floor.l_bullet;
  {
    const auto terms = class_terms(costs);
    double c_star = 0.0;
    for (ClassIndex y : data.labels) c_star += terms[static_cast<std::size_t>(y)].c_star;
    trace.mean_c_star = c_star / (2.0 * static_cast<double>(n_count));
  }

  StrongClassifier& model = result.model;
  model = StrongClassifier(k_count, data.dims());
  model.config_fingerprint = config.fingerprint();
  if (data.label_names.size() == static_cast<std::size_t>(k_count)) model.label_names = data.label_names;

  WeightState& weights = result.weights;
  weights = init_weights(data, costs);
  Matrix scores(n_count, static_cast<std::size_t>(k_count));
  if (config.fit_a0) {
    model.a0 = fit_constant(weights, epsilon);
    const std::vector<std::int8_t> all_positive(n_count, 1);
    add_vote(scores, all_positive, model.a0);
  }

  double loss = loss_from_weights(weights, data, costs);
  trace.initial_loss = loss;
  {
    const auto er = training_error(scores, data, costs);
    trace.initial_error = er.error;
    trace.initial_risk = er.risk;
  }

  auto should_stop = [&](double current) -> std::optional<StopReason> {
    if (config.early_stop_on_certificate && current < floor.l_bullet) return StopReason::Certificate;
    if (current - floor.l_star <= kLossFloorTolerance) return StopReason::LossFloor;
    return std::nullopt;
  };

  trace.stop = StopReason::RoundBudget;
  for (std::size_t t = 1; t <= config.rounds; ++t) {
    if (auto reason = should_stop(loss)) {
      trace.stop = *reason;
      break;
    }

    StumpChoice choice = stump_search(binned, weights, epsilon, config.workers);
    Tree tree(choice.stump);
    std::vector<double> a = std::move(choice.a);
    SplitScores split = std::move(choice.scores);
    for (int depth = 1; depth < config.tree_depth; ++depth) {
      GrowResult grown = grow_layer(tree, a, data, binned, weights, epsilon, config.workers);
      tree = std::move(grown.tree);
      a = std::move(grown.a);
      split = std::move(grown.scores);
    }

    const Edge e = edge(split, trace.mean_c_star, floor);
    const auto outputs = evaluate_outputs(tree, data);
    update_weights(weights, outputs, a, t);
    add_vote(scores, outputs, a);
    loss = loss_from_weights(weights, data, costs);

    RoundRecord rec;
    rec.round = t;
    rec.loss = loss;
    rec.loss_excess = loss - floor.l_star;
    rec.gamma = e.gamma;
    rec.phi = e.phi;
    const auto er = training_error(scores, data, costs);
    rec.train_error = er.error;
    rec.train_risk = er.risk;
    rec.features = describe(tree);
    trace.rounds.push_back(std::move(rec));

    model.rounds.push_back(Round{std::move(tree), std::move(a)});
    if (observer) observer(t, model, weights);
  }
  return result;
}

}  // namespace rebel
