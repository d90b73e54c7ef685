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
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "presque/error.hpp"
#include "presque/rational.hpp"

namespace presque {

// Evenly spaced candidate percentages {0, beta, 2*beta, ..., 1}. Points are
// exact rationals i/steps; everything downstream addresses them by index.
class PercentageGrid {
 public:
  explicit PercentageGrid(Rational beta) {
    if (beta <= Rational(0) || beta > Rational(1)) {
      throw Error(ErrorCode::kNonDividingBeta,
                  "beta must lie in (0, 1], got " + beta.to_string());
    }
    Rational inverse = Rational(1) / beta;
    if (!inverse.is_integer()) {
      throw Error(ErrorCode::kNonDividingBeta,
                  "beta " + beta.to_string() + " does not evenly divide 1");
    }
    steps_ = inverse.num();
  }

  Rational beta() const { return {1, steps_}; }
  std::int64_t steps() const { return steps_; }
  std::size_t size() const { return static_cast<std::size_t>(steps_) + 1; }

  Rational point(std::size_t i) const {
    return {static_cast<std::int64_t>(i), steps_};
  }
  double value(std::size_t i) const {
    return static_cast<double>(i) / static_cast<double>(steps_);
  }
  std::vector<Rational> points() const {
    std::vector<Rational> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
    return out;
  }

  std::optional<std::size_t> index_of(Rational p) const {
    Rational scaled = p * Rational(steps_);
    if (!scaled.is_integer() || scaled.num() < 0 || scaled.num() > steps_) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(scaled.num());
  }

  // Index of the largest grid point <= p, for p in [0, 1].
  std::size_t floor_index(Rational p) const {
    return clamp_index((p * Rational(steps_)).floor());
  }
  // Index of the smallest grid point >= p, for p in [0, 1].
  std::size_t ceil_index(Rational p) const {
    return clamp_index((p * Rational(steps_)).ceil());
  }

  friend bool operator==(const PercentageGrid&, const PercentageGrid&) = default;

 private:
  std::size_t clamp_index(std::int64_t i) const {
    return static_cast<std::size_t>(std::clamp<std::int64_t>(i, 0, steps_));
  }

  std::int64_t steps_ = 1;
};

inline PercentageGrid make_grid(Rational beta) { return PercentageGrid(beta); }
inline PercentageGrid make_grid(std::string_view beta) {
  return PercentageGrid(Rational::parse_decimal(beta));
}

// Closed interval of grid points [lo, hi], tagged with the grid resolution so
// that mixing scopes from different grids can be detected.
struct Scope {
  std::int64_t steps = 1;
  std::size_t lo = 0;
  std::size_t hi = 0;

  Rational p_min() const { return {static_cast<std::int64_t>(lo), steps}; }
  Rational p_max() const { return {static_cast<std::int64_t>(hi), steps}; }
  std::size_t size() const { return hi - lo + 1; }
  bool contains(std::size_t i) const { return lo <= i && i <= hi; }

  friend bool operator==(const Scope&, const Scope&) = default;
};

inline std::string to_string(const Scope& s) {
  return "[" + s.p_min().to_string() + ", " + s.p_max().to_string() + "]";
}

// Smallest grid-aligned interval containing [lo, hi].
inline Scope snap_outward(Rational lo, Rational hi, const PercentageGrid& grid) {
  if (lo > hi || lo < Rational(0) || hi > Rational(1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "snap_outward expects 0 <= lo <= hi <= 1");
  }
  return Scope{grid.steps(), grid.floor_index(lo), grid.ceil_index(hi)};
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Lowercases and maps the determiner surface form "no" onto the lexeme "none".
inline std::string canonical_lexeme(std::string_view word) {
  std::string lex = to_lower(word);
  if (lex == "no") return "none";
  return lex;
}

class QuantifierInventory {
 public:
  QuantifierInventory() : QuantifierInventory(default_lexemes()) {}
  explicit QuantifierInventory(std::vector<std::string> lexemes)
      : lexemes_(std::move(lexemes)) {
    if (lexemes_.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "quantifier inventory is empty");
    }
    std::set<std::string> seen;
    for (const auto& lex : lexemes_) {
      if (lex.empty() || lex != to_lower(lex)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "quantifier lexemes must be non-empty lowercase: '" + lex + "'");
      }
      if (!seen.insert(lex).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate quantifier '" + lex + "'");
      }
    }
  }

  static std::vector<std::string> default_lexemes() {
    return {"all",    "generally", "most", "usually",      "some",
            "likely", "few",       "little", "occasionally", "none",
            "seldom", "tiny",      "small",  "moderate",     "large"};
  }

  const std::vector<std::string>& lexemes() const { return lexemes_; }
  std::size_t size() const { return lexemes_.size(); }
  bool contains(std::string_view lex) const {
    return std::find(lexemes_.begin(), lexemes_.end(), lex) != lexemes_.end();
  }
  // Lexemes in ascending byte order; used wherever a fixed summation order
  // matters.
  std::vector<std::string> sorted() const {
    std::vector<std::string> out = lexemes_;
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::string> lexemes_;
};

}  // namespace presque
