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

#include <optional>
#include <string>
#include <string_view>

#include "presque/error.hpp"
#include "presque/grid.hpp"
#include "presque/rational.hpp"

namespace presque {

enum class ExpressionOp { kExact, kGt, kGeq, kLt, kLeq, kRange, kApprox };

struct PercentageExpression {
  ExpressionOp op = ExpressionOp::kExact;
  Rational value;
  std::optional<Rational> value_hi;  // set iff op == kRange

  friend bool operator==(const PercentageExpression&,
                         const PercentageExpression&) = default;
};

using GoldScope = Scope;

struct GroundingConfig {
  Rational granularity{1, 100};
  int window = 2;

  void validate() const {
    if (granularity <= Rational(0)) {
      throw Error(ErrorCode::kInvalidArgument, "granularity must be positive");
    }
    if (window < 1) {
      throw Error(ErrorCode::kInvalidArgument, "window must be >= 1");
    }
    if (Rational(window) * granularity >= Rational(1)) {
      throw Error(ErrorCode::kInvalidArgument, "window * granularity must be < 1");
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool consume(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

// A proportion written either as a fraction ("0.45") or a percentage ("45%").
inline Rational parse_proportion(std::string_view text, std::string_view whole) {
  text = trim(text);
  bool percent = false;
  if (!text.empty() && text.back() == '%') {
    percent = true;
    text.remove_suffix(1);
  }
  Rational value;
  try {
    value = Rational::parse_decimal(trim(text));
  } catch (const Error&) {
    throw Error(ErrorCode::kMalformedExpression,
                "bad value in expression '" + std::string(whole) + "'");
  }
  if (percent) value = value / Rational(100);
  if (value < Rational(0) || value > Rational(1)) {
    throw Error(ErrorCode::kMalformedExpression,
                "value outside [0, 1] in '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace detail

// Accepts the serialized forms 0.89, >0.93, >=0.45, <0.01, <=0.19, 0.24-0.4
// and ~0.98. Values may also carry a trailing '%'. The unicode variants
// (≥, ≤, ∼, en dash, minus sign) seen in hand-edited files are accepted too.
inline PercentageExpression parse_expression(std::string_view text) {
  std::string_view s = detail::trim(text);
  if (s.empty()) throw Error(ErrorCode::kMalformedExpression, "empty expression");

  PercentageExpression expr;
  if (detail::consume(s, ">=") || detail::consume(s, "\xE2\x89\xA5")) {
    expr.op = ExpressionOp::kGeq;
  } else if (detail::consume(s, "<=") || detail::consume(s, "\xE2\x89\xA4")) {
    expr.op = ExpressionOp::kLeq;
  } else if (detail::consume(s, ">")) {
    expr.op = ExpressionOp::kGt;
  } else if (detail::consume(s, "<")) {
    expr.op = ExpressionOp::kLt;
  } else if (detail::consume(s, "~") || detail::consume(s, "\xE2\x88\xBC")) {
    expr.op = ExpressionOp::kApprox;
  } else {
    // Range separator: the first '-' (or dash) that is not a leading sign.
    for (std::string_view dash : {"-", "\xE2\x80\x93", "\xE2\x88\x92"}) {
      auto pos = s.find(dash, 1);
      if (pos != std::string_view::npos) {
        expr.op = ExpressionOp::kRange;
        expr.value = detail::parse_proportion(s.substr(0, pos), text);
        expr.value_hi = detail::parse_proportion(s.substr(pos + dash.size()), text);
        if (*expr.value_hi < expr.value) {
          throw Error(ErrorCode::kMalformedExpression,
                      "inverted range '" + std::string(text) + "'");
        }
        return expr;
      }
    }
    expr.op = ExpressionOp::kExact;
  }
  if (!s.empty() && (s.front() == '<' || s.front() == '>' || s.front() == '=' ||
                     s.front() == '~')) {
    throw Error(ErrorCode::kMalformedExpression,
                "unknown operator in '" + std::string(text) + "'");
  }
  expr.value = detail::parse_proportion(s, text);
  return expr;
}

inline std::string format_expression(const PercentageExpression& expr) {
  std::string v = expr.value.to_string();
  switch (expr.op) {
    case ExpressionOp::kExact: return v;
    case ExpressionOp::kGt: return ">" + v;
    case ExpressionOp::kGeq: return ">=" + v;
    case ExpressionOp::kLt: return "<" + v;
    case ExpressionOp::kLeq: return "<=" + v;
    case ExpressionOp::kApprox: return "~" + v;
    case ExpressionOp::kRange: return v + "-" + expr.value_hi->to_string();
  }
  return v;
}

// Raw interval per operator, open ends pulled in by one granularity step,
// clipped to [0, 1], then snapped outward onto the grid.
inline GoldScope ground(const PercentageExpression& expr,
                        const GroundingConfig& cfg,
                        const PercentageGrid& grid) {
  cfg.validate();
  const Rational p = expr.value;
  const Rational g = cfg.granularity;
  const Rational span = Rational(cfg.window) * g;

  Rational lo, hi;
  switch (expr.op) {
    case ExpressionOp::kExact: lo = p; hi = p; break;
    case ExpressionOp::kGt: lo = p + g; hi = p + span; break;
    case ExpressionOp::kGeq: lo = p; hi = p + span; break;
    case ExpressionOp::kLt: lo = p - span; hi = p - g; break;
    case ExpressionOp::kLeq: lo = p - span; hi = p; break;
    case ExpressionOp::kRange:
      if (!expr.value_hi) {
        throw Error(ErrorCode::kMalformedExpression, "range without upper bound");
      }
      lo = p;
      hi = *expr.value_hi;
      break;
    case ExpressionOp::kApprox: lo = p - span; hi = p + span; break;
  }
  if (lo > hi) {
    throw Error(ErrorCode::kEmptyScope,
                "'" + format_expression(expr) + "' grounds to an empty interval");
  }
  lo = std::max(lo, Rational(0));
  hi = std::min(hi, Rational(1));
  if (lo > hi) {
    throw Error(ErrorCode::kEmptyScope,
                "'" + format_expression(expr) + "' lies outside [0, 1]");
  }
  return snap_outward(lo, hi, grid);
}

inline GoldScope ground(std::string_view expression, const GroundingConfig& cfg,
                        const PercentageGrid& grid) {
  return ground(parse_expression(expression), cfg, grid);
}

}  // namespace presque
