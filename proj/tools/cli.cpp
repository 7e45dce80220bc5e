#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rebel/baselines.hpp"
#include "rebel/boost.hpp"
#include "rebel/error.hpp"
#include "rebel/eval.hpp"
#include "rebel/format.hpp"
#include "rebel/io.hpp"
#include "rebel/parallel.hpp"
#include "rebel/synth.hpp"

namespace rebel::cli {
namespace {

using json = nlohmann::ordered_json;

struct TrainFlags {
  std::string data, labels, costs, epsilon = "auto", out, trace, val, val_labels;
  std::size_t rounds = 0, n_tau = 200;
  int depth = 1;
  bool no_a0 = false, no_certificate_stop = false;
  std::uint64_t seed = 0;
};

struct PredictFlags {
  std::string model, data, labels, out;
  bool scores = false;
};

struct EvalFlags {
  std::string model, data, labels = "last", costs, out;
};

struct SynthFlags {
  std::string spec, out_train, out_test, costs_out;
  std::optional<std::uint64_t> seed;
  std::uint64_t cost_seed = 0;
};

struct Fig3Flags {
  std::size_t datasets = 10, matrices = 20, rounds = 100, n_tau = 200;
  int depth = 1;
  std::uint64_t seed = 0;
  bool no_a0 = false;
  std::string out;
};

struct OracleFlags {
  std::size_t trials = 20, rounds = 50, samples = 200, dims = 5, n_tau = 200;
  std::uint64_t seed = 0;
  double smoothing_scale = 1.0;
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_file(path, text);
}

std::vector<std::string> model_labels(const StrongClassifier& model) {
  if (!model.label_names.empty()) return model.label_names;
  std::vector<std::string> names;
  for (int k = 1; k <= model.num_classes; ++k) names.push_back(std::to_string(k));
  return names;
}

json evaluation_json(const Evaluation& e, const CostMatrix& costs) { return json::parse(format_report(e, costs)); }

int cmd_train(const TrainFlags& f, unsigned workers, std::ostream& out) {
  const Dataset data = load_dataset(f.data, LabelSpec::parse(f.labels));
  const CostMatrix costs = f.costs.empty() ? CostMatrix::uniform(data.num_classes) : load_cost_matrix(f.costs);
  if (costs.num_classes() != data.num_classes)
    throw InputError("cost matrix has " + std::to_string(costs.num_classes()) + " classes, dataset has " +
                     std::to_string(data.num_classes));

  TrainConfig config;
  config.rounds = f.rounds;
  config.tree_depth = f.depth;
  config.n_tau = f.n_tau;
  if (f.epsilon != "auto") config.epsilon = parse_double(f.epsilon);
  config.fit_a0 = !f.no_a0;
  config.seed = f.seed;
  config.early_stop_on_certificate = !f.no_certificate_stop;
  config.workers = workers;

  const TrainResult result = train(data, costs, config);
  save_model(f.out, result.model);
  if (!f.trace.empty()) {
    std::ostringstream trace;
    write_trace_csv(trace, result.trace);
    write_file(f.trace, trace.str());
  }

  json report;
  report["rounds"] = result.model.rounds.size();
  report["stop"] = to_string(result.trace.stop);
  report["epsilon"] = config.resolve_epsilon(data.size(), data.num_classes);
  report["l_star"] = result.trace.l_star;
  report["l_bullet"] = result.trace.l_bullet;
  report["loss"] = result.trace.rounds.empty() ? result.trace.initial_loss : result.trace.rounds.back().loss;
  const Evaluation train_eval = evaluate(result.model, data, costs, workers);
  report["train_error"] = train_eval.error;
  report["train_risk"] = train_eval.risk;
  report["train"] = evaluation_json(train_eval, costs);
  if (!f.val.empty()) {
    const auto names = model_labels(result.model);
    const Dataset val = load_dataset(f.val, LabelSpec::parse(f.val_labels.empty() ? f.labels : f.val_labels), &names);
    const RoundSelection sel = select_rounds(result.model, val, costs, workers);
    report["best_rounds"] = sel.best_rounds;
    report["validation_risk"] = sel.best_risk;
  }
  out << report.dump(2) << '\n';
  return kSuccess;
}

int cmd_predict(const PredictFlags& f, unsigned workers, std::ostream& out) {
  const StrongClassifier model = load_model(f.model);
  const Matrix features =
      f.labels.empty() ? load_features(f.data) : load_dataset(f.data, LabelSpec::parse(f.labels)).features;
  if (features.cols() != model.num_features)
    throw InputError("data has " + std::to_string(features.cols()) + " features, model expects " +
                     std::to_string(model.num_features));
  const auto names = model_labels(model);
  std::vector<std::string> lines(features.rows());
  parallel_for(features.rows(), workers, [&](std::size_t n) {
    const auto scores = model.scores(features.row(n));
    std::string line = names[static_cast<std::size_t>(argmax_class(scores))];
    if (f.scores)
      for (double s : scores) line += "," + format_double(s);
    lines[n] = std::move(line);
  });
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_text(f.out, text, out);
  return kSuccess;
}

int cmd_eval(const EvalFlags& f, unsigned workers, std::ostream& out) {
  const StrongClassifier model = load_model(f.model);
  const auto names = model_labels(model);
  const Dataset data = load_dataset(f.data, LabelSpec::parse(f.labels), &names);
  const CostMatrix costs = f.costs.empty() ? CostMatrix::uniform(model.num_classes) : load_cost_matrix(f.costs);
  const Evaluation e = evaluate(model, data, costs, workers);
  write_text(f.out, format_report(e, costs) + "\n", out);
  return kSuccess;
}

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  MixtureSpec spec = f.spec.empty() ? random_mixture(MixtureParams{}, f.seed.value_or(0))
                                    : parse_mixture_spec(read_file(f.spec));
  if (f.seed) spec.seed = *f.seed;
  const SyntheticSplit split = gen_dataset(spec);
  std::ostringstream train_csv, test_csv;
  write_dataset(train_csv, split.train);
  write_dataset(test_csv, split.test);
  write_file(f.out_train, train_csv.str());
  write_file(f.out_test, test_csv.str());
  if (!f.costs_out.empty())
    write_file(f.costs_out, format_cost_matrix(gen_cost_matrix(spec.num_classes, f.cost_seed, split.train.labels)));
  out << "classes " << spec.num_classes << ", clusters " << spec.clusters.size() << ", train " << split.train.size()
      << ", test " << split.test.size() << '\n';
  return kSuccess;
}

int cmd_fig3(const Fig3Flags& f, unsigned workers, std::ostream& out) {
  Fig3Config config;
  config.datasets = f.datasets;
  config.matrices = f.matrices;
  config.train.rounds = f.rounds;
  config.train.tree_depth = f.depth;
  config.train.n_tau = f.n_tau;
  config.train.fit_a0 = !f.no_a0;
  config.seed = f.seed;
  config.workers = workers;
  const Fig3Result result = run_fig3(config);

  std::ostringstream csv;
  write_fig3_csv(csv, result);
  write_text(f.out, csv.str(), out);

  std::size_t wins = 0, ties = 0;
  for (const auto& t : result.trials) {
    wins += t.winner == "rebel" ? 1 : 0;
    ties += t.winner == "tie" ? 1 : 0;
  }
  std::ostream& summary = (f.out.empty() || f.out == "-") ? std::cerr : out;
  summary << "baseline: 0-1 trained model, softmax(2H) posterior, expected-cost argmin\n"
          << "trials " << result.trials.size() << ", rebel wins " << wins << ", ties " << ties << '\n'
          << "win fraction " << format_double(result.rebel_win_fraction) << '\n';
  return kSuccess;
}

int cmd_oracle_check(const OracleFlags& f, std::ostream& out, std::ostream& err) {
  for (std::size_t trial = 0; trial < f.trials; ++trial) {
    const Dataset data = random_binary_dataset(f.samples, f.dims, derive_seed(f.seed, 30, trial));
    std::optional<double> epsilon;
    if (f.smoothing_scale != 1.0)
      epsilon = f.smoothing_scale / (2.0 * static_cast<double>(data.size()) * 2.0);
    if (const auto d = compare_with_adaboost(data, f.rounds, f.n_tau, 1e-9, epsilon)) {
      err << "divergence: trial " << trial + 1 << ", round " << d->round << ", " << d->quantity << " (rebel "
          << format_double(d->rebel) << ", adaboost " << format_double(d->adaboost) << ")\n";
      return kCheckFailed;
    }
  }
  out << "oracle check passed: " << f.trials << " trials x " << f.rounds << " rounds\n";
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cost-sensitive multi-class boosting"};
  app.require_subcommand(1);
  unsigned workers = default_workers();
  app.add_option("--workers", workers, "worker threads (default: REBEL_WORKERS or 1)")->check(CLI::Range(1u, 1024u));

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--data", tf.data, "training CSV")->required();
  train_cmd->add_option("--labels", tf.labels, "label column: last, first, <n> or file:PATH")->required();
  train_cmd->add_option("--costs", tf.costs, "cost matrix CSV (default: 0-1 costs)");
  train_cmd->add_option("--rounds", tf.rounds, "boosting rounds")->required();
  train_cmd->add_option("--depth", tf.depth, "tree depth")->required()->check(CLI::Range(1, 16));
  train_cmd->add_option("--ntau", tf.n_tau, "thresholds per feature")->capture_default_str();
  train_cmd->add_option("--epsilon", tf.epsilon, "vote smoothing or 'auto' for 1/(2NK)")->capture_default_str();
  train_cmd->add_flag("--no-a0", tf.no_a0, "do not fit the constant vote");
  train_cmd->add_flag("--no-certificate-stop", tf.no_certificate_stop, "keep training below the zero-risk certificate");
  train_cmd->add_option("--seed", tf.seed, "seed recorded in the model fingerprint");
  train_cmd->add_option("--out", tf.out, "model output path")->required();
  train_cmd->add_option("--trace", tf.trace, "per-round trace CSV");
  train_cmd->add_option("--val", tf.val, "validation CSV for round selection");
  train_cmd->add_option("--val-labels", tf.val_labels, "label spec of the validation CSV (default: --labels)");

  PredictFlags pf;
  auto* predict_cmd = app.add_subcommand("predict", "predict labels");
  predict_cmd->add_option("--model", pf.model, "model file")->required();
  predict_cmd->add_option("--data", pf.data, "feature CSV")->required();
  predict_cmd->add_option("--labels", pf.labels, "label spec when the CSV also holds labels (they are ignored)");
  predict_cmd->add_option("--out", pf.out, "output path (default: stdout)");
  predict_cmd->add_flag("--scores", pf.scores, "append the class scores to each line");

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on labelled data");
  eval_cmd->add_option("--model", ef.model, "model file")->required();
  eval_cmd->add_option("--data", ef.data, "labelled CSV")->required();
  eval_cmd->add_option("--labels", ef.labels, "label spec")->capture_default_str();
  eval_cmd->add_option("--costs", ef.costs, "cost matrix CSV (default: 0-1 costs)");
  eval_cmd->add_option("--out", ef.out, "report path (default: stdout)");

  SynthFlags sf;
  auto* synth_cmd = app.add_subcommand("synth", "generate a Gaussian-mixture dataset");
  synth_cmd->add_option("--spec", sf.spec, "mixture spec file (key=value)");
  synth_cmd->add_option("--seed", sf.seed, "overrides the spec seed");
  synth_cmd->add_option("--out-train", sf.out_train, "training CSV")->required();
  synth_cmd->add_option("--out-test", sf.out_test, "test CSV")->required();
  synth_cmd->add_option("--costs-out", sf.costs_out, "also write a random cost matrix");
  synth_cmd->add_option("--cost-seed", sf.cost_seed, "seed of the random cost matrix");

  Fig3Flags ff;
  auto* fig3_cmd = app.add_subcommand("fig3", "cost-sensitive training vs the two-step baseline");
  fig3_cmd->add_option("--datasets", ff.datasets, "random datasets")->capture_default_str();
  fig3_cmd->add_option("--matrices", ff.matrices, "random cost matrices per dataset")->capture_default_str();
  fig3_cmd->add_option("--rounds", ff.rounds, "boosting rounds")->capture_default_str();
  fig3_cmd->add_option("--depth", ff.depth, "tree depth")->capture_default_str()->check(CLI::Range(1, 16));
  fig3_cmd->add_option("--ntau", ff.n_tau, "thresholds per feature")->capture_default_str();
  fig3_cmd->add_option("--seed", ff.seed, "harness seed");
  fig3_cmd->add_flag("--no-a0", ff.no_a0, "do not fit the constant vote");
  fig3_cmd->add_option("--out", ff.out, "per-trial CSV (default: stdout)");

  OracleFlags of;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "binary reduction check against AdaBoost");
  oracle_cmd->add_option("--trials", of.trials, "random datasets")->capture_default_str();
  oracle_cmd->add_option("--rounds", of.rounds, "rounds per dataset")->capture_default_str();
  oracle_cmd->add_option("--samples", of.samples, "samples per dataset")->capture_default_str();
  oracle_cmd->add_option("--dims", of.dims, "features per dataset")->capture_default_str();
  oracle_cmd->add_option("--ntau", of.n_tau, "thresholds per feature")->capture_default_str();
  oracle_cmd->add_option("--seed", of.seed, "seed");
  oracle_cmd->add_option("--debug-smoothing-scale", of.smoothing_scale,
                         "multiply the trainer's vote smoothing (any value but 1 should fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    const CLI::App* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failed->help();
    return kInputError;
  }

  try {
    if (*train_cmd) return cmd_train(tf, workers, out);
    if (*predict_cmd) return cmd_predict(pf, workers, out);
    if (*eval_cmd) return cmd_eval(ef, workers, out);
    if (*synth_cmd) return cmd_synth(sf, out);
    if (*fig3_cmd) return cmd_fig3(ff, workers, out);
    if (*oracle_cmd) return cmd_oracle_check(of, out, err);
  } catch (const NumericRangeError& e) {
    err << "error: numeric range: " << e.what() << '\n';
    return kNumericError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace rebel::cli
