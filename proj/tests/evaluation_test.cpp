// Copyright 2026 The Presque Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "presque/evaluation.hpp"
#include "rsa_oracle.hpp"

namespace presque {
namespace {

constexpr double kTol = 1e-12;

QuantifiedRecord Record(std::string id, std::string text, std::string q, std::size_t b,
                        std::size_t e, const char* expr, Specificity s) {
  QuantifiedRecord rec;
  rec.id = std::move(id);
  rec.text = std::move(text);
  rec.quantifier = std::move(q);
  rec.span = {b, e};
  rec.gold_expression = parse_expression(expr);
  rec.specificity = s;
  return rec;
}

// Three records on the three-point grid {0, 0.5, 1}.
struct Toy {
  PercentageGrid grid = make_grid("0.5");
  QuantifierInventory inventory{std::vector<std::string>{"few", "some"}};
  QuantifierPrior prior{{{"few", 1.0}, {"some", 2.0}}, inventory};
  MockScorer mock;
  QuReFile file;
  EvalConfig cfg;

  Toy() {
    file.records = {
        Record("a", "Some apples are red.", "some", 0, 4, "0.5", Specificity::kPartial),
        Record("b", "Few birds sing.", "few", 0, 3, "0-0.5", Specificity::kFull),
        Record("c", "Some cats purr.", "some", 0, 4, "1", Specificity::kIndeterminable),
    };
    const double la[] = {0.1, 0.6, 0.3};
    const double lb[] = {0.2, 0.2, 0.6};
    const double lc[] = {0.1, 0.2, 0.7};
    const double* curves[] = {la, lb, lc};
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& rec = file.records[r];
        mock.set_entail(rec.text, substitute_percentage(rec, grid.point(i)), curves[r][i]);
        mock.set_entail(substitute_percentage(rec, grid.point(i)), rec.text, 0.1 + 0.2 * i);
      }
    }
    ground_records(file, GroundingConfig{}, grid);
    cfg.k = 2;
    cfg.consecutive_ks = {1, 2};
  }
};

const AggregateRow& Find(const EvalReport& r, const std::string& group, const std::string& l) {
  for (const auto& a : r.aggregates) {
    if (a.group == group && a.listener == l) return a;
  }
  throw std::runtime_error("missing aggregate row");
}

TEST(EvaluateDatasetTest, HandComputedLiteralListenerRows) {
  Toy toy;
  EvalReport report = evaluate_dataset(toy.file, toy.grid, toy.mock, toy.prior, toy.cfg);
  ASSERT_EQ(report.rows.size(), 9u);
  EXPECT_EQ(report.scorer_id, toy.mock.id());

  // a: scores (0.1, 0.6, 0.3), gold {0.5}.
  const RecordMetrics& a = report.rows[1];
  ASSERT_EQ(a.listener, "L0");
  EXPECT_EQ(a.hit1, 1.0);
  EXPECT_NEAR(a.mrr, 1.0, kTol);
  EXPECT_NEAR(a.ce, -std::log(0.6), kTol);
  EXPECT_EQ(a.f1_1, 1.0);
  EXPECT_NEAR(a.f1_k, 2.0 / 3.0, kTol);
  EXPECT_NEAR(a.msd_k, 1.0, kTol);
  EXPECT_EQ(a.consecutive, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(to_string(a.primary), "[0.5, 1]");

  // b: scores (0.2, 0.2, 0.6), gold {0, 0.5}; ranks 2, 3 for the gold points.
  const RecordMetrics& b = report.rows[4];
  EXPECT_EQ(b.hit1, 0.0);
  EXPECT_NEAR(b.mrr, 1.0 / (2.0 * 5.0), kTol);
  EXPECT_NEAR(b.ce, -2.0 * std::log(0.2), kTol);
  EXPECT_EQ(b.f1_1, 0.0);
  EXPECT_EQ(b.f1_k, 0.0);
  EXPECT_NEAR(b.msd_k, 0.5, kTol);
  EXPECT_EQ(b.consecutive, (std::vector<double>{1.0, 0.0}));

  // c: scores (0.1, 0.2, 0.7), gold {1}.
  const RecordMetrics& c = report.rows[7];
  EXPECT_EQ(c.hit1, 1.0);
  EXPECT_NEAR(c.mrr, 1.0, kTol);
  EXPECT_NEAR(c.ce, -std::log(0.7), kTol);
  EXPECT_NEAR(c.f1_k, 2.0 / 3.0, kTol);
  EXPECT_NEAR(c.msd_k, 1.0, kTol);

  const AggregateRow& total = Find(report, "Total", "L0");
  EXPECT_EQ(total.count, 3u);
  EXPECT_NEAR(total.hit1, 2.0 / 3.0, kTol);
  EXPECT_NEAR(total.mrr, (1.0 + 0.1 + 1.0) / 3.0, kTol);
  EXPECT_NEAR(total.ce, (-std::log(0.6) - 2.0 * std::log(0.2) - std::log(0.7)) / 3.0, kTol);
  EXPECT_NEAR(total.f1_k, (2.0 / 3.0 + 0.0 + 2.0 / 3.0) / 3.0, kTol);
  EXPECT_NEAR(total.msd_k, 2.5 / 3.0, kTol);
  EXPECT_EQ(Find(report, "Fully", "L0").count, 1u);
  EXPECT_NEAR(Find(report, "Fully", "L0").mrr, 0.1, kTol);
}

TEST(EvaluateDatasetTest, PragmaticRowsMatchOracleScores) {
  Toy toy;
  EvalReport report = evaluate_dataset(toy.file, toy.grid, toy.mock, toy.prior, toy.cfg);
  for (std::size_t r = 0; r < 3; ++r) {
    ListenerDistribution l1 = pragmatic_listener(toy.file.records[r], toy.grid, toy.mock, toy.prior);
    RecordMetrics expected = score_prediction(l1.raw, toy.grid.steps(), toy.file.scopes[r], toy.cfg);
    const RecordMetrics& got = report.rows[3 * r + 2];
    EXPECT_EQ(got.listener, "L1");
    EXPECT_EQ(got.hit1, expected.hit1);
    EXPECT_EQ(got.mrr, expected.mrr);
    EXPECT_EQ(got.ce, expected.ce);
  }
}

// Aggregate rows are recomputed from the per-record rows.
TEST(EvaluateDatasetTest, AggregatesAreMeansOfRows) {
  Toy toy;
  toy.cfg.threads = 3;
  EvalReport report = evaluate_dataset(toy.file, toy.grid, toy.mock, toy.prior, toy.cfg);
  ASSERT_EQ(report.aggregates.size(), 12u);
  for (const auto& agg : report.aggregates) {
    double sum_hit = 0, sum_mrr = 0, sum_ce = 0, sum_f1 = 0, sum_f1k = 0, sum_msd = 0;
    std::vector<double> sum_c(toy.cfg.consecutive_ks.size(), 0.0);
    std::size_t n = 0;
    for (const auto& r : report.rows) {
      if (r.listener != agg.listener) continue;
      if (agg.group != "Total") {
        std::string group = r.specificity == Specificity::kFull      ? "Fully"
                            : r.specificity == Specificity::kPartial ? "Partial"
                                                                     : "Indeterminable";
        if (group != agg.group) continue;
      }
      ++n;
      sum_hit += r.hit1;
      sum_mrr += r.mrr;
      sum_ce += r.ce;
      sum_f1 += r.f1_1;
      sum_f1k += r.f1_k;
      sum_msd += r.msd_k;
      for (std::size_t i = 0; i < sum_c.size(); ++i) sum_c[i] += r.consecutive[i];
    }
    ASSERT_EQ(agg.count, n);
    ASSERT_GT(n, 0u);
    EXPECT_NEAR(agg.hit1, sum_hit / n, kTol);
    EXPECT_NEAR(agg.mrr, sum_mrr / n, kTol);
    EXPECT_NEAR(agg.ce, sum_ce / n, kTol);
    EXPECT_NEAR(agg.f1_1, sum_f1 / n, kTol);
    EXPECT_NEAR(agg.f1_k, sum_f1k / n, kTol);
    EXPECT_NEAR(agg.msd_k, sum_msd / n, kTol);
    for (std::size_t i = 0; i < sum_c.size(); ++i) EXPECT_NEAR(agg.consecutive[i], sum_c[i] / n, kTol);
  }
}

std::string Render(const EvalReport& report) {
  std::ostringstream os;
  write_records_csv(report, os);
  write_aggregate_csv(report, os);
  write_summary(report, os);
  os << report_to_json(report).dump();
  return os.str();
}

TEST(EvaluateDatasetTest, OutputIndependentOfThreadCount) {
  Toy toy;
  std::string reference;
  for (std::size_t threads : {1, 2, 3, 8}) {
    toy.cfg.threads = threads;
    std::string out = Render(evaluate_dataset(toy.file, toy.grid, toy.mock, toy.prior, toy.cfg));
    if (reference.empty()) reference = out;
    EXPECT_EQ(out, reference) << threads;
  }
}

TEST(EvaluateDatasetTest, Validation) {
  Toy toy;
  toy.cfg.k = 4;
  EXPECT_THROW(evaluate_dataset(toy.file, toy.grid, toy.mock, toy.prior, toy.cfg), Error);
  Toy missing;
  QuantifierInventory only_few({"few"});
  QuantifierPrior few_prior({{"few", 1.0}}, only_few);
  try {
    evaluate_dataset(missing.file, missing.grid, missing.mock, few_prior, missing.cfg);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidationError);
  }
}

TEST(RandomBaselineTest, SeededAndNormalized) {
  auto a = random_scores(21, 3, 7);
  auto b = random_scores(21, 3, 7);
  auto c = random_scores(21, 3, 8);
  auto d = random_scores(21, 4, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, d);
  double total = 0.0;
  for (double v : a) {
    EXPECT_GT(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(RandomBaselineTest, AveragesOverSeeds) {
  EvalConfig cfg;
  cfg.random_seeds = {0, 1, 2, 3, 4};
  Scope gold{20, 10, 12};
  RecordMetrics mean = random_baseline(21, 20, gold, cfg, 5);
  double hit = 0.0, mrr_sum = 0.0;
  for (std::uint64_t seed : cfg.random_seeds) {
    RecordMetrics m = score_prediction(random_scores(21, seed, 5), 20, gold, cfg);
    hit += m.hit1;
    mrr_sum += m.mrr;
  }
  EXPECT_NEAR(mean.hit1, hit / 5.0, kTol);
  EXPECT_NEAR(mean.mrr, mrr_sum / 5.0, kTol);
  EXPECT_EQ(mean.listener, "Rnd");
}

TEST(CompareHumanTest, EqualDistributionsGiveEntropy) {
  // One HVD sentence per quantifier; the human table is set to the model's
  // own aggregated L1 distributions.
  PercentageGrid grid = make_grid("0.5");
  QuantifierInventory inv({"all", "few"});
  QuantifierPrior prior({{"all", 1.0}, {"few", 1.0}}, inv);
  MockScorer mock;
  std::vector<QuantifiedRecord> records = {render_hvd({"dog", "has_a_tail", "all"}),
                                           render_hvd({"cat", "is_black", "few"})};
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::string pct = substitute_percentage(rec, grid.point(i));
      mock.set_entail(rec.text, pct, 0.2 + 0.3 * i);
      mock.set_entail(pct, rec.text, 0.9 - 0.25 * i);
    }
  }
  HumanInterpretation human;
  human.steps = grid.steps();
  auto l1 = aggregate_listener(records, grid, ListenerKind::kL1, mock, prior, inv);
  for (const auto& [lex, d] : l1.by_quantifier) human.distributions[lex] = d.normalized();
  HumanComparison cmp = compare_human(records, human, grid, mock, prior, inv);
  EXPECT_NEAR(cmp.ce_l1, cmp.human_entropy, 1e-12);
  EXPECT_GT(cmp.ce_l0, cmp.ce_l1);

  HumanInterpretation wrong_grid = human;
  wrong_grid.steps = 10;
  EXPECT_THROW(compare_human(records, wrong_grid, grid, mock, prior, inv), Error);
}

TEST(CompareHumanTest, HandComputedCrossEntropy) {
  PercentageGrid grid = make_grid("0.5");
  QuantifierInventory inv({"all", "few"});
  QuantifierPrior prior({{"all", 1.0}, {"few", 1.0}}, inv);
  MockScorer mock;
  QuantifiedRecord rec = render_hvd({"dog", "has_a_tail", "all"});
  const double curve[] = {0.1, 0.3, 0.6};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    mock.set_entail(rec.text, substitute_percentage(rec, grid.point(i)), curve[i]);
  }
  HumanInterpretation human;
  human.steps = 2;
  human.distributions["all"] = {0.0, 0.25, 0.75};
  HumanComparison cmp = compare_human({rec}, human, grid, mock, prior, inv);
  EXPECT_NEAR(cmp.ce_l0, -(0.25 * std::log(0.3) + 0.75 * std::log(0.6)), 1e-12);
  std::ostringstream plot;
  write_plot_csv(cmp, human, grid, plot);
  EXPECT_NE(plot.str().find("all,0.5,0.250000,0.300000,"), std::string::npos) << plot.str();
}

}  // namespace
}  // namespace presque
