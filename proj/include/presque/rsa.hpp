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

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "presque/error.hpp"
#include "presque/grid.hpp"
#include "presque/scorer.hpp"
#include "presque/templating.hpp"

namespace presque {

enum class ListenerKind { kL0, kL1 };

inline const char* listener_name(ListenerKind k) {
  return k == ListenerKind::kL0 ? "L0" : "L1";
}

// Scales non-negative scores to sum to one. An all-zero vector becomes
// uniform (with a warning) instead of dividing by zero.
inline std::vector<double> normalize_scores(const std::vector<double>& raw) {
  double total = 0.0;
  for (double v : raw) total += v;
  std::vector<double> out(raw.size());
  if (!(total > 0.0)) {
    warn("all-zero score vector, falling back to uniform");
    for (double& v : out) v = 1.0 / static_cast<double>(raw.size());
    return out;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / total;
  return out;
}

// Listener scores over every grid point, indexed like PercentageGrid. `raw`
// keeps the proportional scores; normalized() is the distribution view.
struct ListenerDistribution {
  std::string record_id;
  std::string quantifier;
  ListenerKind kind = ListenerKind::kL0;
  std::int64_t steps = 1;
  std::vector<double> raw;

  std::vector<double> normalized() const { return normalize_scores(raw); }
};

// P(q): positive weight per lexeme, normalized over the inventory.
class QuantifierPrior {
 public:
  QuantifierPrior(const std::map<std::string, double>& weights,
                  const QuantifierInventory& inventory) {
    double total = 0.0;
    for (const auto& lex : inventory.lexemes()) {
      auto it = weights.find(lex);
      if (it == weights.end()) {
        throw Error(ErrorCode::kValidationError, "quantifier prior has no weight for '" + lex + "'");
      }
      if (!(it->second > 0.0)) {
        throw Error(ErrorCode::kValidationError, "quantifier prior weight for '" + lex +
                                                     "' must be positive");
      }
      weights_[lex] = it->second;
      total += it->second;
    }
    for (auto& [lex, w] : weights_) w /= total;
  }

  // English word frequencies (wordfreq 3.x, word_frequency(w, "en")).
  static const std::map<std::string, double>& word_frequencies() {
    static const std::map<std::string, double> kFreq = {
        {"all", 3.31e-03},       {"generally", 8.91e-05}, {"most", 1.00e-03},
        {"usually", 1.41e-04},   {"some", 1.58e-03},      {"likely", 1.58e-04},
        {"few", 3.98e-04},       {"little", 5.62e-04},    {"occasionally", 2.45e-05},
        {"none", 8.51e-05},      {"seldom", 4.27e-06},    {"tiny", 4.17e-05},
        {"small", 3.24e-04},     {"moderate", 1.86e-05},  {"large", 2.45e-04},
    };
    return kFreq;
  }

  static QuantifierPrior from_word_frequencies(const QuantifierInventory& inventory) {
    return QuantifierPrior(word_frequencies(), inventory);
  }

  // Two columns per line: `lexeme weight`. '#' starts a comment.
  static QuantifierPrior load(const std::string& path, const QuantifierInventory& inventory) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open prior file " + path);
    std::map<std::string, double> weights;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream row(line);
      std::string lex;
      if (!(row >> lex)) continue;
      double w = 0.0;
      std::string extra;
      if (!(row >> w) || (row >> extra)) {
        throw Error(ErrorCode::kParseError, path + ":" + std::to_string(lineno) +
                                                ": expected 'lexeme weight'");
      }
      weights[canonical_lexeme(lex)] = w;
    }
    return QuantifierPrior(weights, inventory);
  }

  double weight(const std::string& lex) const {
    auto it = weights_.find(lex);
    return it == weights_.end() ? 0.0 : it->second;
  }
  // Sorted by lexeme, which fixes the mixture's summation order.
  const std::map<std::string, double>& weights() const { return weights_; }

 private:
  std::map<std::string, double> weights_;
};

namespace detail {

inline void check_record(const QuantifiedRecord& rec) {
  if (rec.text.empty()) {
    throw Error(ErrorCode::kValidationError, "record '" + rec.id + "' has empty text");
  }
  locate_quantifier(rec);
}

inline std::vector<double> entail_column(Scorer& scorer,
                                         const std::vector<EntailmentQuery>& queries) {
  std::vector<EntailmentResult> results = scorer.score_batch(queries);
  std::vector<double> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.entail);
  return out;
}

inline std::vector<EntailmentQuery> listener_queries(const QuantifiedRecord& rec,
                                                     const PercentageGrid& grid) {
  std::vector<EntailmentQuery> qs;
  qs.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    qs.push_back({rec.text, substitute_percentage(rec, grid.point(i))});
  }
  return qs;
}

}  // namespace detail

// L0(p|q) ∝ Entailment(quantified sentence, percentage sentence).
inline ListenerDistribution literal_listener(const QuantifiedRecord& rec,
                                             const PercentageGrid& grid, Scorer& scorer) {
  detail::check_record(rec);
  ListenerDistribution d;
  d.record_id = rec.id;
  d.quantifier = rec.quantifier;
  d.kind = ListenerKind::kL0;
  d.steps = grid.steps();
  d.raw = detail::entail_column(scorer, detail::listener_queries(rec, grid));
  return d;
}

// S0(q|p): premise and hypothesis swapped relative to L0, with `q` in place of
// the record's quantifier.
inline double literal_speaker(const QuantifiedRecord& rec, std::string_view q, Rational p,
                              Scorer& scorer) {
  detail::check_record(rec);
  return scorer.score({substitute_percentage(rec, p), substitute_quantifier(rec, q)}).entail;
}

inline std::vector<double> speaker_curve(const QuantifiedRecord& rec, std::string_view q,
                                         const PercentageGrid& grid, Scorer& scorer) {
  detail::check_record(rec);
  std::string hypothesis = substitute_quantifier(rec, q);
  std::vector<EntailmentQuery> qs;
  qs.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    qs.push_back({substitute_percentage(rec, grid.point(i)), hypothesis});
  }
  return detail::entail_column(scorer, qs);
}

// P(p) = sum over q' of P(p|q') P(q'), where P(p|q') is the normalized L0
// curve of the sentence rewritten with q'. Normalized over the grid.
inline std::vector<double> percentage_prior(const QuantifiedRecord& rec,
                                            const PercentageGrid& grid, Scorer& scorer,
                                            const QuantifierPrior& qprior) {
  detail::check_record(rec);
  const auto& weights = qprior.weights();
  std::vector<EntailmentQuery> qs;
  qs.reserve(weights.size() * grid.size());
  for (const auto& [lex, w] : weights) {
    auto rewritten = detail::listener_queries(with_quantifier(rec, lex), grid);
    qs.insert(qs.end(), rewritten.begin(), rewritten.end());
  }
  std::vector<double> scores = detail::entail_column(scorer, qs);

  std::vector<double> mixture(grid.size(), 0.0);
  std::size_t offset = 0;
  for (const auto& [lex, w] : weights) {
    std::vector<double> curve(scores.begin() + static_cast<std::ptrdiff_t>(offset),
                              scores.begin() + static_cast<std::ptrdiff_t>(offset + grid.size()));
    std::vector<double> conditional = normalize_scores(curve);
    for (std::size_t i = 0; i < grid.size(); ++i) mixture[i] += w * conditional[i];
    offset += grid.size();
  }
  return normalize_scores(mixture);
}

// L1(p|q) ∝ S0(q|p) P(p).
inline ListenerDistribution pragmatic_listener(const QuantifiedRecord& rec,
                                               const PercentageGrid& grid, Scorer& scorer,
                                               const QuantifierPrior& qprior) {
  std::vector<double> speaker = speaker_curve(rec, rec.quantifier, grid, scorer);
  std::vector<double> prior = percentage_prior(rec, grid, scorer, qprior);
  ListenerDistribution d;
  d.record_id = rec.id;
  d.quantifier = rec.quantifier;
  d.kind = ListenerKind::kL1;
  d.steps = grid.steps();
  d.raw.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d.raw[i] = speaker[i] * prior[i];
  return d;
}

inline ListenerDistribution listener(ListenerKind kind, const QuantifiedRecord& rec,
                                     const PercentageGrid& grid, Scorer& scorer,
                                     const QuantifierPrior& qprior) {
  return kind == ListenerKind::kL0 ? literal_listener(rec, grid, scorer)
                                   : pragmatic_listener(rec, grid, scorer, qprior);
}

struct AggregateListener {
  // Pointwise mean of raw per-record scores, one entry per quantifier seen.
  std::map<std::string, ListenerDistribution> by_quantifier;
  // Inventory lexemes without any record.
  std::vector<std::string> missing_quantifiers;
};

inline AggregateListener aggregate_listener(const std::vector<QuantifiedRecord>& records,
                                            const PercentageGrid& grid, ListenerKind kind,
                                            Scorer& scorer, const QuantifierPrior& qprior,
                                            const QuantifierInventory& inventory) {
  for (const auto& rec : records) {
    if (!inventory.contains(rec.quantifier)) {
      throw Error(ErrorCode::kUnknownQuantifier,
                  "record '" + rec.id + "' uses '" + rec.quantifier + "'");
    }
  }
  std::map<std::string, std::size_t> counts;
  AggregateListener out;
  for (const auto& rec : records) {
    ListenerDistribution d = listener(kind, rec, grid, scorer, qprior);
    auto [it, fresh] = out.by_quantifier.try_emplace(rec.quantifier);
    ListenerDistribution& acc = it->second;
    if (fresh) {
      acc.record_id = "aggregate";
      acc.quantifier = rec.quantifier;
      acc.kind = kind;
      acc.steps = grid.steps();
      acc.raw.assign(grid.size(), 0.0);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) acc.raw[i] += d.raw[i];
    ++counts[rec.quantifier];
  }
  for (auto& [lex, d] : out.by_quantifier) {
    for (double& v : d.raw) v /= static_cast<double>(counts[lex]);
  }
  for (const auto& lex : inventory.lexemes()) {
    if (!out.by_quantifier.count(lex)) out.missing_quantifiers.push_back(lex);
  }
  return out;
}

}  // namespace presque
