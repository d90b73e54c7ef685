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

#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "presque/error.hpp"
#include "presque/grid.hpp"
#include "presque/grounding.hpp"
#include "presque/rational.hpp"

namespace presque {

enum class Specificity { kFull, kPartial, kIndeterminable };

inline const char* specificity_name(Specificity s) {
  switch (s) {
    case Specificity::kFull: return "full";
    case Specificity::kPartial: return "partial";
    case Specificity::kIndeterminable: return "indeterminable";
  }
  return "?";
}

inline std::optional<Specificity> parse_specificity(std::string_view text) {
  std::string s = to_lower(text);
  if (s == "full" || s == "fully" || s == "f") return Specificity::kFull;
  if (s == "partial" || s == "partially" || s == "p") return Specificity::kPartial;
  if (s == "indeterminable" || s == "i") return Specificity::kIndeterminable;
  return std::nullopt;
}

// Half-open byte range [begin, end) into a record's text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct QuantifiedRecord {
  std::string id;
  std::string text;
  std::string quantifier;
  Span span;
  std::optional<PercentageExpression> gold_expression;
  std::optional<Specificity> specificity;
  std::string source_id;
  // Sentence-initial determiner slot (HVD templates): "none" surfaces as "no".
  bool determiner_form = false;
};

struct HvdTriple {
  std::string concept_name;
  std::string feature;
  std::string quantifier;
};

namespace detail {

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' ||
         (static_cast<unsigned char>(c) & 0x80);
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// Case-insensitive whole-word search for `word` inside `text[from, to)`.
inline std::optional<std::size_t> find_word(std::string_view text,
                                            std::string_view word,
                                            std::size_t from, std::size_t to) {
  if (word.empty() || to < from || to - from < word.size()) return std::nullopt;
  std::string hay = to_lower(text.substr(from, to - from));
  std::string needle = to_lower(word);
  std::size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    std::size_t abs = from + pos;
    bool left_ok = abs == 0 || !is_word_char(text[abs - 1]);
    std::size_t after = abs + needle.size();
    bool right_ok = after >= text.size() || !is_word_char(text[after]);
    if (left_ok && right_ok) return abs;
    ++pos;
  }
  return std::nullopt;
}

inline void check_span(const QuantifiedRecord& rec) {
  if (rec.span.begin > rec.span.end || rec.span.end > rec.text.size()) {
    throw Error(ErrorCode::kSpanOutOfBounds,
                "span [" + std::to_string(rec.span.begin) + ", " +
                    std::to_string(rec.span.end) + ") outside text of length " +
                    std::to_string(rec.text.size()) + " in record '" + rec.id + "'");
  }
}

}  // namespace detail

// How a lexeme is written in running text.
inline std::string surface_form(std::string_view lexeme, bool determiner_form) {
  if (determiner_form && lexeme == "none") return "no";
  return std::string(lexeme);
}

// Position of the quantifier word inside the record's span. The span may be
// wider than the word ("a large amount"); "none" also matches "no".
inline Span locate_quantifier(const QuantifiedRecord& rec) {
  detail::check_span(rec);
  for (const std::string& form : {rec.quantifier, surface_form(rec.quantifier, true)}) {
    if (auto pos = detail::find_word(rec.text, form, rec.span.begin, rec.span.end)) {
      return Span{*pos, *pos + form.size()};
    }
  }
  throw Error(ErrorCode::kValidationError,
              "span of record '" + rec.id + "' does not contain quantifier '" +
                  rec.quantifier + "'");
}

// "30%" when p*100 is integral, otherwise one decimal ("33.3%", half up).
inline std::string render_percentage(Rational p) {
  Rational pct = p * Rational(100);
  if (pct.is_integer()) return std::to_string(pct.num()) + "%";
  std::int64_t tenths = (pct * Rational(10) + Rational(1, 2)).floor();
  std::string sign = tenths < 0 ? "-" : "";
  std::int64_t mag = tenths < 0 ? -tenths : tenths;
  return sign + std::to_string(mag / 10) + "." + std::to_string(mag % 10) + "%";
}

// Replaces the whole quantifier span with the rendered percentage.
inline std::string substitute_percentage(const QuantifiedRecord& rec, Rational p) {
  detail::check_span(rec);
  if (p < Rational(0) || p > Rational(1)) {
    throw Error(ErrorCode::kInvalidArgument, "percentage outside [0, 1]");
  }
  std::string out = rec.text.substr(0, rec.span.begin);
  out += render_percentage(p);
  out += rec.text.substr(rec.span.end);
  return out;
}

// Record rewritten with quantifier `q` in place of the current one. Only the
// quantifier word inside the span is replaced; the span is adjusted to the new
// length and capitalization follows the replaced word's first character.
inline QuantifiedRecord with_quantifier(const QuantifiedRecord& rec, std::string_view q) {
  Span word = locate_quantifier(rec);
  std::string replacement = surface_form(q, rec.determiner_form);
  if (std::isupper(static_cast<unsigned char>(rec.text[word.begin]))) {
    replacement = detail::capitalize(std::move(replacement));
  }
  QuantifiedRecord out = rec;
  out.text = rec.text.substr(0, word.begin) + replacement + rec.text.substr(word.end);
  out.quantifier = std::string(q);
  out.span.end = rec.span.end - word.size() + replacement.size();
  return out;
}

inline std::string substitute_quantifier(const QuantifiedRecord& rec, std::string_view q) {
  return with_quantifier(rec, q).text;
}

// True when the percentage lands right after an article ("a 30% amount"),
// which usually means the annotated span was narrower than the phrase.
inline bool percentage_substitution_needs_review(const QuantifiedRecord& rec) {
  detail::check_span(rec);
  std::size_t end = rec.span.begin;
  while (end > 0 && rec.text[end - 1] == ' ') --end;
  std::size_t begin = end;
  while (begin > 0 && detail::is_word_char(rec.text[begin - 1])) --begin;
  std::string prev = to_lower(std::string_view(rec.text).substr(begin, end - begin));
  return prev == "a" || prev == "an" || prev == "the";
}

inline std::string pluralize(std::string_view noun) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 17> kIrregular{{
      {"child", "children"}, {"man", "men"},       {"woman", "women"},
      {"person", "people"},  {"mouse", "mice"},    {"goose", "geese"},
      {"foot", "feet"},      {"tooth", "teeth"},   {"ox", "oxen"},
      {"louse", "lice"},     {"sheep", "sheep"},   {"fish", "fish"},
      {"deer", "deer"},      {"moose", "moose"},   {"knife", "knives"},
      {"leaf", "leaves"},    {"wolf", "wolves"},
  }};
  std::string s(noun);
  std::size_t last = s.rfind(' ');
  std::string head = last == std::string::npos ? "" : s.substr(0, last + 1);
  std::string tail = last == std::string::npos ? s : s.substr(last + 1);
  for (const auto& [singular, plural] : kIrregular) {
    if (tail == singular) return head + std::string(plural);
  }
  return head + tail + "s";
}

// Verb agreement for a plural subject: has_ -> have, is_ -> are, ...
inline std::string render_feature(std::string_view feature) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kPrefix{{
      {"has_", "have "}, {"is_", "are "}, {"used_", "are used "}, {"does_", "do "},
  }};
  std::string out(feature);
  for (const auto& [from, to] : kPrefix) {
    if (out.rfind(from, 0) == 0) {
      out = std::string(to) + out.substr(from.size());
      break;
    }
  }
  for (char& c : out) {
    if (c == '_') c = ' ';
  }
  return out;
}

// <Quantifier> <plural concept> <feature words>.
inline QuantifiedRecord render_hvd(const HvdTriple& triple) {
  if (triple.concept_name.empty() || triple.feature.empty() || triple.quantifier.empty()) {
    throw Error(ErrorCode::kValidationError, "HVD triple has an empty field");
  }
  std::string noun = triple.concept_name;
  for (char& c : noun) {
    if (c == '_') c = ' ';
  }
  std::string quant = detail::capitalize(surface_form(triple.quantifier, true));
  QuantifiedRecord rec;
  rec.id = triple.concept_name + "/" + triple.feature;
  rec.text = quant + " " + pluralize(noun) + " " + render_feature(triple.feature) + ".";
  rec.quantifier = triple.quantifier;
  rec.span = Span{0, quant.size()};
  rec.determiner_form = true;
  return rec;
}

}  // namespace presque
