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

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "presque/datasets.hpp"
#include "presque/grid.hpp"
#include "presque/metrics.hpp"
#include "presque/rsa.hpp"
#include "presque/scorer.hpp"

namespace presque {

struct EvalConfig {
  std::size_t k = 5;
  std::vector<std::size_t> consecutive_ks = {3, 4, 5};
  std::vector<std::uint64_t> random_seeds = {0, 1, 2, 3, 4};
  std::size_t threads = 1;
};

// Metrics of one listener on one record. The random baseline row holds the
// mean over seeds, so every field is a real.
struct RecordMetrics {
  std::string record_id;
  std::string quantifier;
  Specificity specificity = Specificity::kIndeterminable;
  std::string listener;  // "Rnd", "L0" or "L1"
  double hit1 = 0.0;
  double mrr = 0.0;
  double ce = 0.0;
  double f1_1 = 0.0;
  double f1_k = 0.0;
  double msd_k = 0.0;
  std::vector<double> consecutive;  // one per EvalConfig::consecutive_ks
  Scope primary;                    // primary scope of the top K (not for Rnd)
};

struct AggregateRow {
  std::string group;  // Fully, Partial, Indeterminable, Total
  std::string listener;
  std::size_t count = 0;
  double hit1 = 0.0, mrr = 0.0, ce = 0.0, f1_1 = 0.0, f1_k = 0.0, msd_k = 0.0;
  std::vector<double> consecutive;
};

struct EvalReport {
  EvalConfig config;
  std::string scorer_id;
  std::vector<RecordMetrics> rows;
  std::vector<AggregateRow> aggregates;
};

inline RecordMetrics score_prediction(const std::vector<double>& scores, std::int64_t steps,
                                      const GoldScope& gold, const EvalConfig& cfg) {
  RankedPrediction pred(steps, scores);
  RecordMetrics m;
  m.hit1 = hit_at_1(pred, gold);
  m.mrr = mrr(pred, gold);
  ListenerDistribution view;
  view.steps = steps;
  view.raw = scores;
  m.ce = cross_entropy_gold(view, gold);
  m.f1_1 = span_f1(primary_scope(pred, 1).scope, gold);
  PrimaryScope primary = primary_scope(pred, cfg.k);
  m.f1_k = span_f1(primary.scope, gold);
  m.primary = primary.scope;
  m.msd_k = msd_at_k(pred, gold, cfg.k);
  for (std::size_t k : cfg.consecutive_ks) m.consecutive.push_back(consecutive_at_k(pred, k));
  return m;
}

// Standard-normal scores pushed through a softmax.
inline std::vector<double> random_scores(std::size_t n, std::uint64_t seed,
                                         std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(n);
  for (double& v : z) v = normal(rng);
  double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

inline RecordMetrics random_baseline(std::size_t n, std::int64_t steps, const GoldScope& gold,
                                     const EvalConfig& cfg, std::uint64_t stream) {
  RecordMetrics mean;
  mean.listener = "Rnd";
  mean.consecutive.assign(cfg.consecutive_ks.size(), 0.0);
  for (std::uint64_t seed : cfg.random_seeds) {
    RecordMetrics m = score_prediction(random_scores(n, seed, stream), steps, gold, cfg);
    mean.hit1 += m.hit1;
    mean.mrr += m.mrr;
    mean.ce += m.ce;
    mean.f1_1 += m.f1_1;
    mean.f1_k += m.f1_k;
    mean.msd_k += m.msd_k;
    for (std::size_t i = 0; i < m.consecutive.size(); ++i) mean.consecutive[i] += m.consecutive[i];
  }
  double s = static_cast<double>(std::max<std::size_t>(cfg.random_seeds.size(), 1));
  mean.hit1 /= s;
  mean.mrr /= s;
  mean.ce /= s;
  mean.f1_1 /= s;
  mean.f1_k /= s;
  mean.msd_k /= s;
  for (double& c : mean.consecutive) c /= s;
  return mean;
}

// Runs `fn(i)` for i in [0, n) on up to `threads` workers. Exceptions are
// rethrown for the lowest failing index.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::vector<AggregateRow> aggregate_rows(const std::vector<RecordMetrics>& rows,
                                                const EvalConfig& cfg) {
  static const std::vector<std::pair<std::string, std::optional<Specificity>>> kGroups = {
      {"Fully", Specificity::kFull},
      {"Partial", Specificity::kPartial},
      {"Indeterminable", Specificity::kIndeterminable},
      {"Total", std::nullopt},
  };
  std::vector<AggregateRow> out;
  for (const char* listener : {"Rnd", "L0", "L1"}) {
    for (const auto& [group, only] : kGroups) {
      AggregateRow agg;
      agg.group = group;
      agg.listener = listener;
      agg.consecutive.assign(cfg.consecutive_ks.size(), 0.0);
      for (const auto& r : rows) {
        if (r.listener != listener || (only && r.specificity != *only)) continue;
        ++agg.count;
        agg.hit1 += r.hit1;
        agg.mrr += r.mrr;
        agg.ce += r.ce;
        agg.f1_1 += r.f1_1;
        agg.f1_k += r.f1_k;
        agg.msd_k += r.msd_k;
        for (std::size_t i = 0; i < r.consecutive.size(); ++i) agg.consecutive[i] += r.consecutive[i];
      }
      if (agg.count > 0) {
        double c = static_cast<double>(agg.count);
        agg.hit1 /= c;
        agg.mrr /= c;
        agg.ce /= c;
        agg.f1_1 /= c;
        agg.f1_k /= c;
        agg.msd_k /= c;
        for (double& v : agg.consecutive) v /= c;
      }
      out.push_back(agg);
    }
  }
  return out;
}

// Random baseline, L0 and L1 on every grounded record, then per-specificity
// means. Per-record work is spread over cfg.threads; the reduction walks
// records in file order so the report does not depend on scheduling.
inline EvalReport evaluate_dataset(const QuReFile& file, const PercentageGrid& grid,
                                   Scorer& scorer, const QuantifierPrior& qprior,
                                   const EvalConfig& cfg) {
  if (file.scopes.size() != file.records.size()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset has not been grounded");
  }
  if (cfg.k < 1 || cfg.k > grid.size()) {
    throw Error(ErrorCode::kValidationError, "K=" + std::to_string(cfg.k) +
                                                 " exceeds the grid size " +
                                                 std::to_string(grid.size()));
  }
  for (std::size_t k : cfg.consecutive_ks) {
    if (k < 1 || k > grid.size()) {
      throw Error(ErrorCode::kValidationError, "consecutiveness K=" + std::to_string(k) +
                                                   " exceeds the grid size");
    }
  }
  for (const auto& rec : file.records) {
    if (qprior.weights().count(rec.quantifier) == 0) {
      throw Error(ErrorCode::kValidationError,
                  "quantifier '" + rec.quantifier + "' of record '" + rec.id +
                      "' has no prior weight");
    }
  }
  const std::size_t n = file.records.size();
  std::vector<std::array<RecordMetrics, 3>> per_record(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto& rec = file.records[i];
    const auto& gold = file.scopes[i];
    ListenerDistribution l0 = literal_listener(rec, grid, scorer);
    ListenerDistribution l1 = pragmatic_listener(rec, grid, scorer, qprior);
    auto& slot = per_record[i];
    slot[0] = random_baseline(grid.size(), grid.steps(), gold, cfg, i);
    slot[1] = score_prediction(l0.raw, grid.steps(), gold, cfg);
    slot[1].listener = "L0";
    slot[2] = score_prediction(l1.raw, grid.steps(), gold, cfg);
    slot[2].listener = "L1";
    for (auto& m : slot) {
      m.record_id = rec.id;
      m.quantifier = rec.quantifier;
      m.specificity = rec.specificity.value_or(Specificity::kIndeterminable);
    }
  });
  EvalReport report;
  report.config = cfg;
  report.scorer_id = scorer.id();
  for (auto& slot : per_record) {
    for (auto& m : slot) report.rows.push_back(std::move(m));
  }
  report.aggregates = aggregate_rows(report.rows, cfg);
  return report;
}

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline void write_records_csv(const EvalReport& report, std::ostream& os) {
  os << "record_id,quantifier,specificity,listener,hit@1,mrr,ce,f1@1,f1@" << report.config.k
     << ",msd@" << report.config.k;
  for (std::size_t k : report.config.consecutive_ks) os << ",consecutive@" << k;
  os << ",primary_min,primary_max\n";
  for (const auto& r : report.rows) {
    os << detail::csv_field(r.record_id) << ',' << r.quantifier << ','
       << specificity_name(r.specificity) << ',' << r.listener << ',' << detail::fixed(r.hit1)
       << ',' << detail::fixed(r.mrr) << ',' << detail::fixed(r.ce) << ','
       << detail::fixed(r.f1_1) << ',' << detail::fixed(r.f1_k) << ','
       << detail::fixed(r.msd_k);
    for (double c : r.consecutive) os << ',' << detail::fixed(c);
    if (r.listener == "Rnd") {
      os << ",,\n";
    } else {
      os << ',' << r.primary.p_min().to_string() << ',' << r.primary.p_max().to_string() << '\n';
    }
  }
}

inline void write_aggregate_csv(const EvalReport& report, std::ostream& os) {
  os << "specificity,listener,count,hit@1,mrr,ce,f1@1,f1@" << report.config.k << ",msd@"
     << report.config.k;
  for (std::size_t k : report.config.consecutive_ks) os << ",consecutive@" << k;
  os << '\n';
  for (const auto& a : report.aggregates) {
    os << a.group << ',' << a.listener << ',' << a.count << ',' << detail::fixed(a.hit1) << ','
       << detail::fixed(a.mrr) << ',' << detail::fixed(a.ce) << ',' << detail::fixed(a.f1_1)
       << ',' << detail::fixed(a.f1_k) << ',' << detail::fixed(a.msd_k);
    for (double c : a.consecutive) os << ',' << detail::fixed(c);
    os << '\n';
  }
}

// Table-style summary: metrics on a 0-100 scale except cross-entropy.
inline void write_summary(const EvalReport& report, std::ostream& os) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-15s %-4s %5s %7s %7s %7s %7s %7s %7s\n", "specificity",
                "L", "n", "HIT@1", "MRR", "CE", "F1@1",
                ("F1@" + std::to_string(report.config.k)).c_str(),
                ("MSD@" + std::to_string(report.config.k)).c_str());
  os << line;
  for (const auto& a : report.aggregates) {
    std::snprintf(line, sizeof(line), "%-15s %-4s %5zu %7.1f %7.1f %7.2f %7.1f %7.1f %7.3f\n",
                  a.group.c_str(), a.listener.c_str(), a.count, 100 * a.hit1, 100 * a.mrr, a.ce,
                  100 * a.f1_1, 100 * a.f1_k, a.msd_k);
    os << line;
  }
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["scorer_id"] = report.scorer_id;
  j["k"] = report.config.k;
  j["consecutive_ks"] = report.config.consecutive_ks;
  j["random_seeds"] = report.config.random_seeds;
  auto metrics = [](auto& out, const auto& m) {
    out["hit@1"] = m.hit1;
    out["mrr"] = m.mrr;
    out["ce"] = m.ce;
    out["f1@1"] = m.f1_1;
    out["f1@k"] = m.f1_k;
    out["msd@k"] = m.msd_k;
    out["consecutive"] = m.consecutive;
  };
  j["records"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"record_id", r.record_id},
                          {"quantifier", r.quantifier},
                          {"specificity", specificity_name(r.specificity)},
                          {"listener", r.listener}};
    metrics(row, r);
    if (r.listener != "Rnd") row["primary_scope"] = to_string(r.primary);
    j["records"].push_back(row);
  }
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    nlohmann::json row = {{"specificity", a.group}, {"listener", a.listener}, {"count", a.count}};
    metrics(row, a);
    j["aggregates"].push_back(row);
  }
  return j;
}

// HVD comparison: per-quantifier aggregated L0/L1 against human distributions.
struct HumanComparison {
  AggregateListener l0;
  AggregateListener l1;
  double ce_l0 = 0.0;
  double ce_l1 = 0.0;
  double human_entropy = 0.0;  // mean entropy of the shared human distributions
};

inline double mean_entropy(const HumanInterpretation& human,
                           const std::map<std::string, ListenerDistribution>& model) {
  double total = 0.0;
  std::size_t shared = 0;
  for (const auto& [lex, h] : human.distributions) {
    if (!model.count(lex)) continue;
    for (double p : h) {
      if (p > 0.0) total -= p * std::log(p);
    }
    ++shared;
  }
  return shared ? total / static_cast<double>(shared) : 0.0;
}

inline HumanComparison compare_human(const std::vector<QuantifiedRecord>& records,
                                     const HumanInterpretation& human,
                                     const PercentageGrid& grid, Scorer& scorer,
                                     const QuantifierPrior& qprior,
                                     const QuantifierInventory& inventory) {
  if (human.steps != grid.steps()) {
    throw Error(ErrorCode::kValidationError, "human interpretations use a different grid");
  }
  HumanComparison out;
  out.l0 = aggregate_listener(records, grid, ListenerKind::kL0, scorer, qprior, inventory);
  out.l1 = aggregate_listener(records, grid, ListenerKind::kL1, scorer, qprior, inventory);
  out.ce_l0 = hvd_cross_entropy(human, out.l0.by_quantifier);
  out.ce_l1 = hvd_cross_entropy(human, out.l1.by_quantifier);
  out.human_entropy = mean_entropy(human, out.l1.by_quantifier);
  return out;
}

// Bar-chart data: one row per (quantifier, grid point).
inline void write_plot_csv(const HumanComparison& cmp, const HumanInterpretation& human,
                           const PercentageGrid& grid, std::ostream& os) {
  os << "quantifier,percentage,human,L0,L1\n";
  std::set<std::string> lexemes;
  for (const auto& [lex, d] : cmp.l1.by_quantifier) lexemes.insert(lex);
  for (const auto& [lex, d] : human.distributions) lexemes.insert(lex);
  for (const auto& lex : lexemes) {
    auto column = [&](const std::map<std::string, ListenerDistribution>& m) {
      auto it = m.find(lex);
      return it == m.end() ? std::vector<double>() : it->second.normalized();
    };
    std::vector<double> l0 = column(cmp.l0.by_quantifier);
    std::vector<double> l1 = column(cmp.l1.by_quantifier);
    auto h_it = human.distributions.find(lex);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      os << lex << ',' << grid.point(i).to_string() << ',';
      if (h_it != human.distributions.end()) os << detail::fixed(h_it->second[i]);
      os << ',';
      if (!l0.empty()) os << detail::fixed(l0[i]);
      os << ',';
      if (!l1.empty()) os << detail::fixed(l1[i]);
      os << '\n';
    }
  }
}

// Single-sentence inference: both listeners, their top-K and primary scopes.
struct InferenceReport {
  ListenerDistribution l0;
  ListenerDistribution l1;
  std::size_t k = 5;
};

inline InferenceReport infer(const QuantifiedRecord& rec, const PercentageGrid& grid,
                             Scorer& scorer, const QuantifierPrior& qprior, std::size_t k) {
  if (k < 1 || k > grid.size()) {
    throw Error(ErrorCode::kValidationError, "K exceeds the grid size");
  }
  return {literal_listener(rec, grid, scorer), pragmatic_listener(rec, grid, scorer, qprior), k};
}

inline void write_inference_text(const InferenceReport& r, const QuantifiedRecord& rec,
                                 const PercentageGrid& grid, std::ostream& os) {
  os << "sentence:   " << rec.text << "\n";
  os << "quantifier: " << rec.quantifier << "\n";
  os << "beta:       " << grid.beta().to_string() << "\n\n";
  os << "percentage        L0        L1\n";
  std::vector<double> n0 = r.l0.normalized();
  std::vector<double> n1 = r.l1.normalized();
  char line[128];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(line, sizeof(line), "%10s  %8.6f  %8.6f\n",
                  render_percentage(grid.point(i)).c_str(), n0[i], n1[i]);
    os << line;
  }
  for (const ListenerDistribution* d : {&r.l0, &r.l1}) {
    RankedPrediction pred(*d);
    os << "\n" << listener_name(d->kind) << " top-" << r.k << ":";
    for (std::size_t rank = 0; rank < r.k; ++rank) {
      os << ' ' << render_percentage(grid.point(pred.entries()[rank].index));
    }
    PrimaryScope ps = primary_scope(pred, r.k);
    os << "\n" << listener_name(d->kind) << " primary scope: "
       << render_percentage(ps.scope.p_min()) << " - " << render_percentage(ps.scope.p_max())
       << "\n";
  }
}

inline nlohmann::json inference_to_json(const InferenceReport& r, const QuantifiedRecord& rec,
                                        const PercentageGrid& grid) {
  nlohmann::json j;
  j["sentence"] = rec.text;
  j["quantifier"] = rec.quantifier;
  j["beta"] = grid.beta().to_string();
  j["k"] = r.k;
  for (const ListenerDistribution* d : {&r.l0, &r.l1}) {
    RankedPrediction pred(*d);
    nlohmann::json l;
    l["raw"] = d->raw;
    l["normalized"] = d->normalized();
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t rank = 0; rank < r.k; ++rank) {
      top.push_back(grid.point(pred.entries()[rank].index).to_string());
    }
    l["top_k"] = top;
    PrimaryScope ps = primary_scope(pred, r.k);
    l["primary_scope"] = {ps.scope.p_min().to_string(), ps.scope.p_max().to_string()};
    l["primary_mass"] = ps.mass;
    j[listener_name(d->kind)] = l;
  }
  return j;
}

}  // namespace presque
