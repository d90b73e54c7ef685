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
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "presque/error.hpp"
#include "presque/grid.hpp"
#include "presque/rsa.hpp"

namespace presque {

inline constexpr double kProbabilityFloor = 1e-12;

// Full grid ordered by descending score; ties go to the smaller grid point.
class RankedPrediction {
 public:
  struct Entry {
    std::size_t index;
    double score;
  };

  RankedPrediction(std::int64_t steps, std::span<const double> scores) : steps_(steps) {
    if (scores.size() != static_cast<std::size_t>(steps) + 1) {
      throw Error(ErrorCode::kGridMismatch, "score vector does not cover the grid");
    }
    entries_.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) entries_.push_back({i, scores[i]});
    std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return a.score > b.score;
    });
    rank_.resize(entries_.size());
    for (std::size_t r = 0; r < entries_.size(); ++r) rank_[entries_[r].index] = r + 1;
    scores_.assign(scores.begin(), scores.end());
  }

  explicit RankedPrediction(const ListenerDistribution& d)
      : RankedPrediction(d.steps, d.raw) {}

  std::int64_t steps() const { return steps_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t top() const { return entries_.front().index; }
  // 1-based rank of grid index i.
  std::size_t rank_of(std::size_t i) const { return rank_.at(i); }
  double score_of(std::size_t i) const { return scores_.at(i); }

  // Grid indices of the K best points, ascending.
  std::vector<std::size_t> top_k(std::size_t k) const {
    if (k < 1 || k > size()) {
      throw Error(ErrorCode::kInvalidArgument, "K must lie in [1, grid size], got " +
                                                   std::to_string(k));
    }
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) out.push_back(entries_[r].index);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::int64_t steps_;
  std::vector<Entry> entries_;
  std::vector<std::size_t> rank_;
  std::vector<double> scores_;
};

struct PrimaryScope {
  Scope scope;
  double mass = 0.0;
};

// Per-lexeme human distributions P_h(p|q) over one grid.
struct HumanInterpretation {
  std::int64_t steps = 1;
  std::map<std::string, std::vector<double>> distributions;
};

namespace detail {

inline void check_same_grid(std::int64_t a, std::int64_t b) {
  if (a != b) {
    throw Error(ErrorCode::kGridMismatch, "grid with " + std::to_string(a) +
                                              " steps vs " + std::to_string(b) + " steps");
  }
}

}  // namespace detail

inline int hit_at_1(const RankedPrediction& pred, const Scope& gold) {
  detail::check_same_grid(pred.steps(), gold.steps);
  return gold.contains(pred.top()) ? 1 : 0;
}

// beta / (B_m * sum of gold ranks), B_m = p_max - p_min + beta. Both beta and
// B_m are multiples of 1/steps, so the ratio reduces to 1 / |gold|.
inline double mrr(const RankedPrediction& pred, const Scope& gold) {
  detail::check_same_grid(pred.steps(), gold.steps);
  std::size_t rank_sum = 0;
  for (std::size_t i = gold.lo; i <= gold.hi; ++i) rank_sum += pred.rank_of(i);
  return 1.0 / (static_cast<double>(gold.size()) * static_cast<double>(rank_sum));
}

// -sum over gold points of log(L(p)/sum L), natural log.
inline double cross_entropy_gold(const ListenerDistribution& dist, const Scope& gold) {
  detail::check_same_grid(dist.steps, gold.steps);
  double total = 0.0;
  for (double v : dist.raw) total += v;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kDegenerateDistribution, "listener scores sum to zero");
  }
  double ce = 0.0;
  for (std::size_t i = gold.lo; i <= gold.hi; ++i) {
    ce -= std::log(std::max(dist.raw[i] / total, kProbabilityFloor));
  }
  return ce;
}

// Mean over shared lexemes of -sum_p P_h(p|q) log L_M(p|q).
inline double hvd_cross_entropy(const HumanInterpretation& human,
                                const std::map<std::string, ListenerDistribution>& model) {
  double total = 0.0;
  std::size_t shared = 0;
  for (const auto& [lex, h] : human.distributions) {
    auto it = model.find(lex);
    if (it == model.end()) continue;
    detail::check_same_grid(human.steps, it->second.steps);
    std::vector<double> m = it->second.normalized();
    if (m.size() != h.size()) {
      throw Error(ErrorCode::kGridMismatch, "distribution length mismatch for '" + lex + "'");
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
      total -= h[i] * std::log(std::max(m[i], kProbabilityFloor));
    }
    ++shared;
  }
  if (shared == 0) {
    throw Error(ErrorCode::kInventoryMismatch, "no quantifier shared by human and model");
  }
  return total / static_cast<double>(shared);
}

inline int consecutive_at_k(const RankedPrediction& pred, std::size_t k) {
  std::vector<std::size_t> top = pred.top_k(k);
  for (std::size_t i = 1; i < top.size(); ++i) {
    if (top[i] != top[i - 1] + 1) return 0;
  }
  return 1;
}

// Maximal consecutive run within the top K with the largest score sum; ties
// go to the run with the smaller p_min.
inline PrimaryScope primary_scope(const RankedPrediction& pred, std::size_t k) {
  std::vector<std::size_t> top = pred.top_k(k);
  PrimaryScope best;
  bool have = false;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= top.size(); ++i) {
    if (i < top.size() && top[i] == top[i - 1] + 1) continue;
    double mass = 0.0;
    for (std::size_t j = start; j < i; ++j) mass += pred.score_of(top[j]);
    if (!have || mass > best.mass) {
      best = PrimaryScope{Scope{pred.steps(), top[start], top[i - 1]}, mass};
      have = true;
    }
    start = i;
  }
  return best;
}

// Point-set F1 between two scopes on the same grid.
inline double span_f1(const Scope& pred, const Scope& gold) {
  detail::check_same_grid(pred.steps, gold.steps);
  std::size_t lo = std::max(pred.lo, gold.lo);
  std::size_t hi = std::min(pred.hi, gold.hi);
  if (lo > hi) return 0.0;
  double overlap = static_cast<double>(hi - lo + 1);
  double precision = overlap / static_cast<double>(pred.size());
  double recall = overlap / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

// Sum over top-K points outside gold of (distance to the nearest gold
// endpoint) / B_m.
inline double msd_at_k(const RankedPrediction& pred, const Scope& gold, std::size_t k) {
  detail::check_same_grid(pred.steps(), gold.steps);
  double total = 0.0;
  for (std::size_t i : pred.top_k(k)) {
    if (gold.contains(i)) continue;
    std::size_t dist = i < gold.lo ? gold.lo - i : i - gold.hi;
    total += static_cast<double>(dist) / static_cast<double>(gold.size());
  }
  return total;
}

}  // namespace presque
