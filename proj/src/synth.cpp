#include "rebel/synth.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "rebel/baselines.hpp"
#include "rebel/error.hpp"
#include "rebel/format.hpp"
#include "rebel/loss.hpp"
#include "rebel/parallel.hpp"

namespace rebel {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_count(std::string_view key, std::string_view value) {
  const double v = parse_double(value);
  if (v < 0.0 || v != std::floor(v) || v > 1e15)
    throw InputError("'" + std::string(key) + "' must be a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

Dataset sample_split(const MixtureSpec& spec, std::size_t total, std::mt19937_64& rng,
                     std::vector<std::size_t>& cluster_of) {
  const auto k_count = static_cast<std::size_t>(spec.num_classes);
  std::vector<std::vector<std::size_t>> by_class(k_count);
  for (std::size_t c = 0; c < spec.clusters.size(); ++c)
    by_class[static_cast<std::size_t>(spec.clusters[c].label)].push_back(c);

  Dataset data;
  data.num_classes = spec.num_classes;
  for (std::size_t k = 0; k < k_count; ++k) data.label_names.push_back(std::to_string(k + 1));
  data.features = Matrix(total, 2);
  data.labels.reserve(total);
  cluster_of.clear();
  cluster_of.reserve(total);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t n = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const std::size_t count = total / k_count + (k < total % k_count ? 1 : 0);
    std::uniform_int_distribution<std::size_t> pick(0, by_class[k].size() - 1);
    for (std::size_t i = 0; i < count; ++i, ++n) {
      const std::size_t c = by_class[k][pick(rng)];
      const Cluster& cl = spec.clusters[c];
      const double l11 = std::sqrt(cl.cov[0]);
      const double l21 = cl.cov[1] / l11;
      const double l22 = std::sqrt(cl.cov[2] - l21 * l21);
      const double z1 = normal(rng);
      const double z2 = normal(rng);
      data.features(n, 0) = cl.mean[0] + l11 * z1;
      data.features(n, 1) = cl.mean[1] + l21 * z1 + l22 * z2;
      data.labels.push_back(static_cast<ClassIndex>(k));
      cluster_of.push_back(c);
    }
  }
  return data;
}

}  // namespace

void MixtureSpec::validate() const {
  if (num_classes < 2) throw InputError("mixture needs at least 2 classes");
  if (train_size < static_cast<std::size_t>(num_classes) || test_size < static_cast<std::size_t>(num_classes))
    throw InputError("every class needs at least one train and one test sample");
  std::vector<bool> covered(static_cast<std::size_t>(num_classes), false);
  for (const auto& c : clusters) {
    if (c.label < 0 || c.label >= num_classes) throw InputError("cluster label out of range");
    const double det = c.cov[0] * c.cov[2] - c.cov[1] * c.cov[1];
    if (!(c.cov[0] > 0.0) || !(det > 0.0) || !std::isfinite(det))
      throw InputError("cluster covariance is not symmetric positive definite");
    if (!std::isfinite(c.mean[0]) || !std::isfinite(c.mean[1])) throw InputError("cluster mean is not finite");
    covered[static_cast<std::size_t>(c.label)] = true;
  }
  for (std::size_t k = 0; k < covered.size(); ++k)
    if (!covered[k]) throw InputError("class " + std::to_string(k + 1) + " has no cluster");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over a mixed key
  std::uint64_t z = base ^ (stream * 0x9e3779b97f4a7c15ULL) ^ (index * 0xbf58476d1ce4e5b9ULL);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MixtureSpec random_mixture(const MixtureParams& p, std::uint64_t seed) {
  if (p.clusters_per_class < 1) throw InputError("clusters_per_class must be >= 1");
  if (!(p.cov_min > 0.0) || p.cov_max < p.cov_min) throw InputError("need 0 < cov_min <= cov_max");
  if (!(p.mean_range >= 0.0)) throw InputError("mean_range must be >= 0");
  MixtureSpec spec;
  spec.num_classes = p.num_classes;
  spec.train_size = p.train_size;
  spec.test_size = p.test_size;
  spec.seed = seed;

  std::mt19937_64 rng(derive_seed(seed, 0, 0));
  std::uniform_real_distribution<double> mean(-p.mean_range, p.mean_range);
  std::uniform_real_distribution<double> var(p.cov_min, p.cov_max);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  for (int k = 0; k < p.num_classes; ++k) {
    for (int c = 0; c < p.clusters_per_class; ++c) {
      Cluster cl;
      cl.label = k;
      cl.mean = {mean(rng), mean(rng)};
      const double s1 = var(rng), s2 = var(rng), theta = angle(rng);
      const double co = std::cos(theta), si = std::sin(theta);
      cl.cov = {s1 * co * co + s2 * si * si, (s1 - s2) * co * si, s1 * si * si + s2 * co * co};
      spec.clusters.push_back(cl);
    }
  }
  spec.validate();
  return spec;
}

MixtureSpec parse_mixture_spec(std::string_view text) {
  MixtureParams params;
  std::uint64_t seed = 0;
  std::vector<Cluster> explicit_clusters;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InputError("spec line " + std::to_string(line_no) + ": expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "classes") params.num_classes = static_cast<int>(parse_count(key, value));
      else if (key == "clusters_per_class") params.clusters_per_class = static_cast<int>(parse_count(key, value));
      else if (key == "mean_range") params.mean_range = parse_double(value);
      else if (key == "cov_min") params.cov_min = parse_double(value);
      else if (key == "cov_max") params.cov_max = parse_double(value);
      else if (key == "train") params.train_size = parse_count(key, value);
      else if (key == "test") params.test_size = parse_count(key, value);
      else if (key == "seed") seed = parse_count(key, value);
      else if (key == "cluster") {
        std::vector<double> v;
        std::string_view rest = value;
        while (true) {
          const auto comma = rest.find(',');
          v.push_back(parse_double(trim(rest.substr(0, comma))));
          if (comma == std::string_view::npos) break;
          rest = rest.substr(comma + 1);
        }
        if (v.size() != 6) throw InputError("cluster needs label, mean_x, mean_y, cov_xx, cov_xy, cov_yy");
        if (v[0] < 1 || v[0] != std::floor(v[0])) throw InputError("cluster label must be a positive integer");
        explicit_clusters.push_back(
            Cluster{static_cast<ClassIndex>(v[0]) - 1, {v[1], v[2]}, {v[3], v[4], v[5]}});
      } else {
        throw InputError("unknown key '" + std::string(key) + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw InputError("spec line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  if (explicit_clusters.empty()) return random_mixture(params, seed);
  MixtureSpec spec;
  spec.num_classes = params.num_classes;
  spec.clusters = std::move(explicit_clusters);
  spec.train_size = params.train_size;
  spec.test_size = params.test_size;
  spec.seed = seed;
  spec.validate();
  return spec;
}

SyntheticSplit gen_dataset(const MixtureSpec& spec) {
  spec.validate();
  SyntheticSplit out;
  std::mt19937_64 train_rng(derive_seed(spec.seed, 1, 0));
  std::mt19937_64 test_rng(derive_seed(spec.seed, 2, 0));
  out.train = sample_split(spec, spec.train_size, train_rng, out.train_cluster);
  out.test = sample_split(spec, spec.test_size, test_rng, out.test_cluster);
  return out;
}

CostMatrix gen_cost_matrix(int num_classes, std::uint64_t seed, std::span<const ClassIndex> labels) {
  if (num_classes < 2) throw InputError("cost matrix needs at least 2 classes");
  const auto k = static_cast<std::size_t>(num_classes);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(k, k);
  for (std::size_t y = 0; y < k; ++y) {
    for (std::size_t j = 0; j < k; ++j) {
      if (y == j) continue;
      double v = 0.0;
      while (v == 0.0) v = std::abs(normal(rng));
      m(y, j) = v;
    }
  }
  return normalize_random_unit(CostMatrix(std::move(m)), labels);
}

Dataset random_binary_dataset(std::size_t samples, std::size_t dims, std::uint64_t seed) {
  if (samples < 2 || dims < 1) throw InputError("need at least 2 samples and 1 feature");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution flip(0.1);
  std::vector<double> direction(dims);
  for (double& v : direction) v = unit(rng);

  Dataset data;
  data.num_classes = 2;
  data.label_names = {"1", "2"};
  data.features = Matrix(samples, dims);
  for (std::size_t n = 0; n < samples; ++n) {
    double score = 0.0;
    for (std::size_t j = 0; j < dims; ++j) {
      data.features(n, j) = unit(rng);
      score += direction[j] * data.features(n, j);
    }
    ClassIndex y = score > 0.0 ? 0 : 1;
    if (flip(rng)) y = 1 - y;
    data.labels.push_back(y);
  }
  // both classes must be present
  data.labels[0] = 0;
  data.labels[1] = 1;
  return data;
}

Fig3Config::Fig3Config() {
  train.rounds = 100;
  train.tree_depth = 1;
  train.early_stop_on_certificate = false;
}

Fig3Result run_fig3(const Fig3Config& config) {
  if (config.datasets == 0 || config.matrices == 0) throw InputError("fig3 needs at least one dataset and matrix");
  TrainConfig train_cfg = config.train;
  train_cfg.workers = 1;
  const int k_count = config.mixture.num_classes;

  struct Prepared {
    std::uint64_t seed = 0;
    SyntheticSplit split;
    std::vector<PosteriorEstimate> test_posteriors;
  };
  std::vector<Prepared> prepared(config.datasets);
  parallel_for(config.datasets, config.workers, [&](std::size_t d) {
    Prepared& p = prepared[d];
    p.seed = derive_seed(config.seed, 10, d);
    p.split = gen_dataset(random_mixture(config.mixture, p.seed));
    const StrongClassifier neutral = train(p.split.train, CostMatrix::uniform(k_count), train_cfg).model;
    p.test_posteriors.reserve(p.split.test.size());
    for (std::size_t n = 0; n < p.split.test.size(); ++n)
      p.test_posteriors.push_back(estimate_posterior(neutral, p.split.test.sample(n)));
  });

  Fig3Result result;
  result.trials.resize(config.datasets * config.matrices);
  parallel_for(result.trials.size(), config.workers, [&](std::size_t id) {
    const std::size_t d = id / config.matrices;
    const std::size_t m = id % config.matrices;
    const Prepared& p = prepared[d];
    Fig3Trial& trial = result.trials[id];
    trial.trial_id = id;
    trial.dataset_seed = p.seed;
    trial.cost_seed = derive_seed(config.seed, 20, m);
    const CostMatrix costs = gen_cost_matrix(k_count, trial.cost_seed, p.split.train.labels);

    const StrongClassifier model = train(p.split.train, costs, train_cfg).model;
    const Dataset& test = p.split.test;
    std::vector<ClassIndex> direct(test.size()), two_step(test.size());
    for (std::size_t n = 0; n < test.size(); ++n) {
      direct[n] = model.predict(test.sample(n));
      two_step[n] = two_step_predict(p.test_posteriors[n], costs);
    }
    trial.rebel_risk = empirical_risk(direct, test.labels, costs);
    trial.twostep_risk = empirical_risk(two_step, test.labels, costs);
    trial.winner = trial.rebel_risk < trial.twostep_risk   ? "rebel"
                   : trial.twostep_risk < trial.rebel_risk ? "twostep"
                                                           : "tie";
  });

  std::size_t wins = 0;
  for (const auto& t : result.trials) wins += t.winner == "rebel" ? 1 : 0;
  result.rebel_win_fraction = static_cast<double>(wins) / static_cast<double>(result.trials.size());
  return result;
}

void write_fig3_csv(std::ostream& out, const Fig3Result& result) {
  out << "trial_id,dataset_seed,cost_seed,rebel_risk,twostep_risk,winner\n";
  for (const auto& t : result.trials)
    out << t.trial_id << ',' << t.dataset_seed << ',' << t.cost_seed << ',' << format_double(t.rebel_risk) << ','
        << format_double(t.twostep_risk) << ',' << t.winner << '\n';
}

}  // namespace rebel
