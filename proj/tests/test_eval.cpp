#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "oracles.hpp"
#include "rebel/boost.hpp"
#include "rebel/error.hpp"
#include "rebel/eval.hpp"

using namespace rebel;

TEST(Evaluate, PerfectPredictions) {
  const std::vector<ClassIndex> labels{0, 1, 2, 2, 0};
  const auto e = evaluate_predictions(labels, labels, CostMatrix::uniform(3));
  EXPECT_EQ(e.error, 0.0);
  EXPECT_EQ(e.risk, 0.0);
  for (ClassIndex y = 0; y < 3; ++y)
    for (ClassIndex k = 0; k < 3; ++k)
      if (y != k) EXPECT_EQ(e.confusion(y, k), 0u);
  EXPECT_EQ(e.confusion(2, 2), 2u);
  EXPECT_EQ(e.confusion.correct(), 5u);
}

TEST(Evaluate, ZeroOneRiskEqualsError) {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ClassIndex> labels(40), predictions(40);
    for (std::size_t n = 0; n < 40; ++n) {
      labels[n] = static_cast<ClassIndex>(rng() % 4);
      predictions[n] = static_cast<ClassIndex>(rng() % 4);
    }
    const auto e = evaluate_predictions(predictions, labels, CostMatrix::uniform(4));
    EXPECT_EQ(e.risk, e.error);
    EXPECT_EQ(e.confusion.total(), 40u);
  }
}

TEST(Evaluate, ConfusionRiskMatchesSampleRisk) {
  std::mt19937_64 rng(31);
  const Dataset d = oracle::blobs(3, 20, 1.0, rng);
  const CostMatrix c = oracle::random_costs(3, rng);
  TrainConfig cfg;
  cfg.rounds = 5;
  cfg.n_tau = 10;
  const auto model = train(d, c, cfg).model;
  const auto e = evaluate(model, d, c, 2);
  EXPECT_NEAR(risk_from_confusion(e.confusion, c), e.risk, 1e-12);
  std::size_t rows = 0;
  for (ClassIndex y = 0; y < 3; ++y) rows += e.confusion.row_total(y);
  EXPECT_EQ(rows, d.size());
}

TEST(Report, JsonFields) {
  const std::vector<ClassIndex> labels{0, 1}, predictions{1, 1};
  Matrix m(2, 2);
  m(0, 1) = 3;
  m(1, 0) = 1;
  const CostMatrix c(m);
  const auto j = nlohmann::json::parse(format_report(evaluate_predictions(predictions, labels, c), c));
  EXPECT_EQ(j["risk"].get<double>(), 1.5);
  EXPECT_EQ(j["error"].get<double>(), 0.5);
  EXPECT_EQ(j["K"].get<int>(), 2);
  EXPECT_EQ(j["N"].get<int>(), 2);
  EXPECT_EQ(j["confusion"], nlohmann::json::parse("[[0,1],[0,1]]"));
  EXPECT_EQ(j["cost_checksum"].get<std::string>().size(), 16u);
  EXPECT_NE(cost_checksum(c), cost_checksum(c.scaled(2.0)));
}

TEST(SelectRounds, CurveExamples) {
  const std::vector<double> falling{0.5, 0.4, 0.3, 0.2};
  EXPECT_EQ(select_rounds_from_curve(falling), 3u);
  std::vector<double> interior{0.9, 0.8, 0.7, 0.6, 0.5, 0.45, 0.4, 0.1, 0.3, 0.35, 0.5};
  EXPECT_EQ(select_rounds_from_curve(interior), 7u);
  std::vector<double> tie(11, 0.5);
  tie[5] = 0.2;
  tie[9] = 0.2;
  EXPECT_EQ(select_rounds_from_curve(tie), 5u);
  EXPECT_THROW(select_rounds_from_curve(std::vector<double>{}), InputError);
}

TEST(SelectRounds, IncrementalRisksMatchPrefixes) {
  std::mt19937_64 rng(32);
  const Dataset train_set = oracle::blobs(3, 30, 1.5, rng);
  const Dataset validation = oracle::blobs(3, 20, 1.5, rng);
  const CostMatrix c = oracle::random_costs(3, rng);
  TrainConfig cfg;
  cfg.rounds = 12;
  cfg.n_tau = 20;
  cfg.early_stop_on_certificate = false;
  const auto model = train(train_set, c, cfg).model;
  const auto sel = select_rounds(model, validation, c);
  ASSERT_EQ(sel.risks.size(), model.rounds.size() + 1);
  for (std::size_t t = 0; t < sel.risks.size(); ++t)
    EXPECT_NEAR(sel.risks[t], evaluate(model.prefix(t), validation, c).risk, 1e-12);
  EXPECT_EQ(sel.best_rounds, select_rounds_from_curve(sel.risks));
  EXPECT_EQ(sel.best_risk, sel.risks[sel.best_rounds]);

  Dataset empty = validation;
  empty.features = Matrix(0, 2);
  empty.labels.clear();
  EXPECT_THROW(select_rounds(model, empty, c), InputError);
}
