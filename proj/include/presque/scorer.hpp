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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "presque/error.hpp"

namespace presque {

struct EntailmentQuery {
  std::string premise;
  std::string hypothesis;

  friend bool operator==(const EntailmentQuery&, const EntailmentQuery&) = default;
};

struct EntailmentResult {
  double entail = 0.0;
  double neutral = 0.0;
  double contradict = 0.0;

  friend bool operator==(const EntailmentResult&, const EntailmentResult&) = default;
};

inline constexpr double kSimplexTolerance = 1e-6;

inline bool is_simplex(const EntailmentResult& r) {
  for (double v : {r.entail, r.neutral, r.contradict}) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return std::abs(r.entail + r.neutral + r.contradict - 1.0) <= kSimplexTolerance;
}

// Entailment probability e, remainder split evenly between the other classes.
inline EntailmentResult result_from_entail(double e) {
  return {e, (1.0 - e) / 2.0, (1.0 - e) / 2.0};
}

inline bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3
                    : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += len;
  }
  return true;
}

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

class Scorer {
 public:
  virtual ~Scorer() = default;

  // Backend identity; part of every cache key.
  virtual std::string id() const = 0;

  EntailmentResult score(const EntailmentQuery& q) {
    return score_batch(std::span<const EntailmentQuery>(&q, 1)).front();
  }

  // Positionally aligned with `queries`. Any failure aborts the whole batch.
  std::vector<EntailmentResult> score_batch(std::span<const EntailmentQuery> queries) {
    if (queries.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "score_batch needs at least one query");
    }
    for (const auto& q : queries) {
      if (q.premise.empty() || q.hypothesis.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "empty premise or hypothesis");
      }
      if (!is_valid_utf8(q.premise) || !is_valid_utf8(q.hypothesis)) {
        throw Error(ErrorCode::kInvalidArgument, "query is not valid UTF-8");
      }
    }
    std::vector<EntailmentResult> out = do_score_batch(queries);
    if (out.size() != queries.size()) {
      throw Error(ErrorCode::kProtocolError, "backend returned " +
                                                 std::to_string(out.size()) + " results for " +
                                                 std::to_string(queries.size()) + " queries");
    }
    for (const auto& r : out) {
      if (!is_simplex(r)) {
        throw Error(ErrorCode::kProtocolError, "backend result is not a probability simplex");
      }
    }
    return out;
  }

 protected:
  virtual std::vector<EntailmentResult> do_score_batch(
      std::span<const EntailmentQuery> queries) = 0;
};

// Content-addressed lookup table. Identical strings fall back to entail 0.99,
// anything else unknown to the uniform triple.
class MockScorer : public Scorer {
 public:
  static constexpr EntailmentResult kReflexive{0.99, 0.005, 0.005};
  static constexpr EntailmentResult kUniform{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  void set(std::string premise, std::string hypothesis, EntailmentResult r) {
    if (!is_simplex(r)) {
      throw Error(ErrorCode::kInvalidArgument, "mock entry is not a probability simplex");
    }
    auto key = std::make_pair(std::move(premise), std::move(hypothesis));
    auto it = table_.find(key);
    if (it != table_.end()) {
      digest_ -= entry_hash(it->first, it->second);
      it->second = r;
    } else {
      it = table_.emplace(std::move(key), r).first;
    }
    digest_ += entry_hash(it->first, it->second);
  }
  void set_entail(std::string premise, std::string hypothesis, double e) {
    set(std::move(premise), std::move(hypothesis), result_from_entail(e));
  }

  std::size_t size() const { return table_.size(); }
  const std::map<std::pair<std::string, std::string>, EntailmentResult>& table() const {
    return table_;
  }

  std::string id() const override { return "mock-" + hex64(digest_); }

  EntailmentResult lookup(const EntailmentQuery& q) const {
    auto it = table_.find(std::make_pair(q.premise, q.hypothesis));
    if (it != table_.end()) return it->second;
    if (q.premise == q.hypothesis) return kReflexive;
    return kUniform;
  }

  // One JSON object per line: premise, hypothesis, entail and optionally
  // neutral/contradict (otherwise the remainder is split evenly).
  static MockScorer load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open mock table " + path);
    MockScorer mock;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto j = nlohmann::json::parse(line);
        double e = j.at("entail").get<double>();
        EntailmentResult r = result_from_entail(e);
        if (j.contains("neutral") || j.contains("contradict")) {
          r = {e, j.at("neutral").get<double>(), j.at("contradict").get<double>()};
        }
        mock.set(j.at("premise").get<std::string>(), j.at("hypothesis").get<std::string>(), r);
      } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::kParseError,
                    path + ":" + std::to_string(lineno) + ": " + ex.what());
      } catch (const Error& ex) {
        throw Error(ErrorCode::kParseError,
                    path + ":" + std::to_string(lineno) + ": " + ex.what());
      }
    }
    return mock;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write mock table " + path);
    for (const auto& [key, r] : table_) {
      nlohmann::json j = {{"premise", key.first},   {"hypothesis", key.second},
                          {"entail", r.entail},     {"neutral", r.neutral},
                          {"contradict", r.contradict}};
      out << j.dump() << "\n";
    }
  }

 protected:
  std::vector<EntailmentResult> do_score_batch(
      std::span<const EntailmentQuery> queries) override {
    std::vector<EntailmentResult> out;
    out.reserve(queries.size());
    for (const auto& q : queries) out.push_back(lookup(q));
    return out;
  }

 private:
  static std::uint64_t entry_hash(const std::pair<std::string, std::string>& key,
                                  const EntailmentResult& r) {
    std::string blob = key.first + '\x1f' + key.second + '\x1f' + format_double(r.entail) +
                       '\x1f' + format_double(r.neutral) + '\x1f' + format_double(r.contradict);
    return stable_hash(blob);
  }

  std::map<std::pair<std::string, std::string>, EntailmentResult> table_;
  std::uint64_t digest_ = 0;  // order-independent sum of entry hashes
};

// Memoized results keyed by (scorer id, premise hash, hypothesis hash).
// Optionally backed by an append-only text file, one entry per line:
//   scorer_id \t premise_hash \t hypothesis_hash \t entail \t neutral \t contradict
class ScoreCache {
 public:
  ScoreCache() = default;
  explicit ScoreCache(const std::string& path) : path_(path) {
    load();
    out_.open(path_, std::ios::app);
    if (!out_) throw Error(ErrorCode::kIoError, "cannot open cache file " + path_);
  }

  std::optional<EntailmentResult> lookup(const std::string& scorer_id,
                                         const EntailmentQuery& q) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(make_key(scorer_id, q));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void insert(const std::string& scorer_id, const EntailmentQuery& q,
              const EntailmentResult& r) {
    std::string key = make_key(scorer_id, q);
    std::unique_lock lock(mu_);
    auto [it, inserted] = entries_.emplace(key, r);
    if (!inserted) return;
    if (out_.is_open()) {
      out_ << key << '\t' << format_double(r.entail) << '\t' << format_double(r.neutral)
           << '\t' << format_double(r.contradict) << '\n';
      out_.flush();
    }
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }

 private:
  static std::string make_key(const std::string& scorer_id, const EntailmentQuery& q) {
    return scorer_id + '\t' + hex64(stable_hash(q.premise)) + '\t' +
           hex64(stable_hash(q.hypothesis));
  }

  void load() {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::size_t bad = 0;
    while (std::getline(in, line)) {
      std::vector<std::string_view> cols;
      std::string_view rest = line;
      for (std::size_t pos; (pos = rest.find('\t')) != std::string_view::npos;) {
        cols.push_back(rest.substr(0, pos));
        rest.remove_prefix(pos + 1);
      }
      cols.push_back(rest);
      EntailmentResult r;
      if (cols.size() != 6 || !parse(cols[3], r.entail) || !parse(cols[4], r.neutral) ||
          !parse(cols[5], r.contradict) || !is_simplex(r)) {
        ++bad;
        continue;
      }
      std::string key = std::string(cols[0]) + '\t' + std::string(cols[1]) + '\t' +
                        std::string(cols[2]);
      entries_.emplace(std::move(key), r);
    }
    if (bad > 0) {
      warn("skipped " + std::to_string(bad) + " malformed line(s) in cache " + path_);
    }
  }

  static bool parse(std::string_view s, double& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
  }

  std::string path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, EntailmentResult> entries_;
  std::ofstream out_;
};

// Serves hits from the cache and forwards misses to the wrapped backend.
class CachedScorer : public Scorer {
 public:
  CachedScorer(Scorer& backend, ScoreCache& cache) : backend_(backend), cache_(cache) {}

  std::string id() const override { return backend_.id(); }

 protected:
  std::vector<EntailmentResult> do_score_batch(
      std::span<const EntailmentQuery> queries) override {
    const std::string sid = backend_.id();
    std::vector<EntailmentResult> out(queries.size());
    std::vector<EntailmentQuery> misses;
    std::map<std::pair<std::string, std::string>, std::size_t> pending;
    std::vector<std::size_t> slot(queries.size(), SIZE_MAX);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (auto hit = cache_.lookup(sid, queries[i])) {
        out[i] = *hit;
        continue;
      }
      auto key = std::make_pair(queries[i].premise, queries[i].hypothesis);
      auto [it, fresh] = pending.emplace(key, misses.size());
      if (fresh) misses.push_back(queries[i]);
      slot[i] = it->second;
    }
    if (!misses.empty()) {
      std::vector<EntailmentResult> fetched = backend_.score_batch(misses);
      for (std::size_t k = 0; k < misses.size(); ++k) cache_.insert(sid, misses[k], fetched[k]);
      for (std::size_t i = 0; i < queries.size(); ++i) {
        if (slot[i] != SIZE_MAX) out[i] = fetched[slot[i]];
      }
    }
    return out;
  }

 private:
  Scorer& backend_;
  ScoreCache& cache_;
};

}  // namespace presque
