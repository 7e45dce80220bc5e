#include "rebel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rebel/boost.hpp"
#include "rebel/error.hpp"

namespace rebel {

double BinaryAdaBoostModel::score(std::span<const double> x) const {
  double h = 0.0;
  for (const auto& r : rounds) h += r.alpha * r.stump(x);
  return h;
}

ClassIndex BinaryAdaBoostModel::predict(std::span<const double> x) const { return score(x) >= 0.0 ? 0 : 1; }

BinaryAdaBoostModel adaboost_train(const Dataset& data, const BinnedFeatures& binned, const AdaBoostConfig& config,
                                   const AdaBoostObserver& observer) {
  data.validate();
  if (data.num_classes != 2) throw InputError("AdaBoost needs exactly 2 classes");
  const std::size_t n_count = data.size();
  const double smoothing = config.smoothing.value_or(1.0 / (2.0 * static_cast<double>(n_count)));

  std::vector<double> sign(n_count);
  for (std::size_t n = 0; n < n_count; ++n) sign[n] = data.labels[n] == 0 ? 1.0 : -1.0;
  std::vector<double> weight(n_count, 1.0 / static_cast<double>(n_count));

  BinaryAdaBoostModel model;
  for (std::size_t t = 1; t <= config.rounds; ++t) {
    // wrong[j][2i] is polarity +1 at threshold i, wrong[j][2i+1] polarity -1
    std::vector<std::vector<double>> wrong(binned.dims());
    double least = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < binned.dims(); ++j) {
      if (binned.grid().constant[j]) continue;
      const auto bins = binned.feature(j);
      const std::size_t buckets = binned.bucket_count(j);
      // weight per bucket for y* = +1 and y* = -1
      std::vector<double> pos(buckets, 0.0), neg(buckets, 0.0);
      for (std::size_t n = 0; n < n_count; ++n) (sign[n] > 0 ? pos : neg)[bins[n]] += weight[n];

      const std::size_t n_tau = buckets - 1;
      std::vector<double> right_pos(n_tau), right_neg(n_tau);
      double rp = 0.0, rn = 0.0;
      for (std::size_t i = n_tau; i-- > 0;) {
        rp += pos[i + 1];
        rn += neg[i + 1];
        right_pos[i] = rp;
        right_neg[i] = rn;
      }
      wrong[j].resize(2 * n_tau);
      double lp = 0.0, ln = 0.0;
      for (std::size_t i = 0; i < n_tau; ++i) {
        lp += pos[i];
        ln += neg[i];
        // polarity +1 predicts y* = +1 on the right
        wrong[j][2 * i] = right_neg[i] + lp;
        wrong[j][2 * i + 1] = right_pos[i] + ln;
        least = std::min({least, wrong[j][2 * i], wrong[j][2 * i + 1]});
      }
    }
    if (!std::isfinite(least)) throw InputError("every feature is constant; nothing to split on");

    std::size_t best_j = 0, best_c = 0;
    bool placed = false;
    for (std::size_t j = 0; j < wrong.size() && !placed; ++j) {
      for (std::size_t c = 0; c < wrong[j].size() && !placed; ++c) {
        if (search_tied(wrong[j][c], least)) {
          best_j = j;
          best_c = c;
          placed = true;
        }
      }
    }
    const Stump best{best_j, binned.grid().thresholds[best_j][best_c / 2], best_c % 2 == 0 ? 1 : -1};
    const double best_wrong = wrong[best_j][best_c];
    // the opposite polarity is wrong exactly where this one is right
    const double best_right = wrong[best_j][best_c ^ 1];

    AdaBoostRound round;
    round.stump = best;
    round.weighted_error = best_wrong / (best_wrong + best_right);
    round.alpha = 0.5 * (std::log(best_right + smoothing) - std::log(best_wrong + smoothing));

    for (std::size_t n = 0; n < n_count; ++n)
      weight[n] *= std::exp(-round.alpha * sign[n] * best(data.sample(n)));
    model.rounds.push_back(round);
    if (observer) observer(t, round, weight);
  }
  return model;
}

BinaryAdaBoostModel adaboost_train(const Dataset& data, const AdaBoostConfig& config) {
  return adaboost_train(data, BinnedFeatures(data, build_grid(data, config.n_tau)), config);
}

std::optional<OracleDivergence> compare_with_adaboost(const Dataset& data, std::size_t rounds, std::size_t n_tau,
                                                      double tolerance, std::optional<double> rebel_epsilon) {
  if (data.num_classes != 2) throw InputError("the AdaBoost comparison needs exactly 2 classes");
  TrainConfig config;
  config.rounds = rounds;
  config.tree_depth = 1;
  config.n_tau = n_tau;
  config.fit_a0 = false;
  config.early_stop_on_certificate = false;
  config.epsilon = rebel_epsilon;
  const StrongClassifier rebel = train(data, CostMatrix::uniform(2), config).model;

  AdaBoostConfig ada_config;
  ada_config.rounds = rounds;
  ada_config.n_tau = n_tau;
  const BinaryAdaBoostModel ada = adaboost_train(data, ada_config);

  if (rebel.rounds.size() != ada.rounds.size())
    return OracleDivergence{std::min(rebel.rounds.size(), ada.rounds.size()) + 1, "rounds",
                            static_cast<double>(rebel.rounds.size()), static_cast<double>(ada.rounds.size())};

  std::vector<double> h1(data.size(), 0.0), h2(data.size(), 0.0);
  for (std::size_t t = 0; t < rebel.rounds.size(); ++t) {
    const Round& r = rebel.rounds[t];
    const Stump& s = r.learner.nodes().front();
    const AdaBoostRound& a = ada.rounds[t];
    if (s.feature != a.stump.feature)
      return OracleDivergence{t + 1, "feature", static_cast<double>(s.feature), static_cast<double>(a.stump.feature)};
    if (s.threshold != a.stump.threshold) return OracleDivergence{t + 1, "threshold", s.threshold, a.stump.threshold};
    const double expected = s.polarity * a.stump.polarity * a.alpha;
    if (!(std::abs(r.vote[0] - expected) <= tolerance)) return OracleDivergence{t + 1, "a1", r.vote[0], expected};
    if (!(std::abs(r.vote[1] + r.vote[0]) <= tolerance)) return OracleDivergence{t + 1, "a2", r.vote[1], -r.vote[0]};
    for (std::size_t n = 0; n < data.size(); ++n) {
      const double f = r.learner(data.sample(n));
      h1[n] += f * r.vote[0];
      h2[n] += f * r.vote[1];
      if (!(std::abs(h1[n] + h2[n]) <= tolerance)) return OracleDivergence{t + 1, "H1+H2", h1[n], -h2[n]};
    }
  }
  return std::nullopt;
}

PosteriorEstimate posterior_from_scores(std::span<const double> scores) {
  PosteriorEstimate p;
  if (scores.empty()) return p;
  const double top = *std::max_element(scores.begin(), scores.end());
  p.probs.resize(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    p.probs[k] = std::exp(2.0 * (scores[k] - top));
    total += p.probs[k];
  }
  for (double& v : p.probs) v /= total;
  return p;
}

PosteriorEstimate estimate_posterior(const StrongClassifier& model, std::span<const double> x) {
  return posterior_from_scores(model.scores(x));
}

ClassIndex two_step_predict(const PosteriorEstimate& posterior, const CostMatrix& costs) {
  const int k_count = costs.num_classes();
  if (posterior.probs.size() != static_cast<std::size_t>(k_count))
    throw InputError("posterior size does not match cost matrix");
  ClassIndex best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (ClassIndex k = 0; k < k_count; ++k) {
    double expected = 0.0;
    for (ClassIndex y = 0; y < k_count; ++y) expected += posterior.probs[static_cast<std::size_t>(y)] * costs(y, k);
    if (expected < best_cost) {
      best_cost = expected;
      best = k;
    }
  }
  return best;
}

}  // namespace rebel
