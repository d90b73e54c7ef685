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
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "presque/error.hpp"
#include "presque/grid.hpp"
#include "presque/grounding.hpp"
#include "presque/metrics.hpp"
#include "presque/templating.hpp"

namespace presque {

// Optional first line of a QuRe file: {"header": {...}}.
struct QuReHeader {
  std::optional<Rational> beta;
  std::optional<Rational> granularity;
  std::optional<int> window;

  bool empty() const { return !beta && !granularity && !window; }
};

struct QuReFile {
  QuReHeader header;
  std::vector<QuantifiedRecord> records;
  std::vector<GoldScope> scopes;          // parallel to records once grounded
  std::vector<std::string> needs_review;  // ids whose percentage splice follows an article
};

struct HvdEntry {
  HvdTriple triple;  // quantifier = majority label
  std::vector<std::string> labels;
  bool tie = false;
};

struct HvdFile {
  std::vector<HvdEntry> entries;

  std::vector<QuantifiedRecord> records() const {
    std::vector<QuantifiedRecord> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(render_hvd(e.triple));
    return out;
  }
};

namespace detail {

// Span offsets in files count Unicode code points; in memory they are bytes.
inline std::size_t codepoint_to_byte(std::string_view s, std::size_t cp) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) continue;
    if (count == cp) return i;
    ++count;
  }
  if (count == cp) return s.size();
  return std::string_view::npos;
}

inline std::size_t byte_to_codepoint(std::string_view s, std::size_t byte) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < byte && i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++count;
  }
  return count;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

inline std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

inline QuReHeader parse_header(const nlohmann::json& h) {
  QuReHeader header;
  auto rational = [](const nlohmann::json& v) {
    return v.is_string() ? Rational::parse_decimal(v.get<std::string>())
                         : Rational::parse_decimal(v.dump());
  };
  if (h.contains("beta")) header.beta = rational(h["beta"]);
  if (h.contains("granularity")) header.granularity = rational(h["granularity"]);
  if (h.contains("window")) header.window = h["window"].get<int>();
  return header;
}

}  // namespace detail

// Reads and validates a QuRe JSONL file without grounding it.
inline QuReFile parse_qure(const std::string& path, const QuantifierInventory& inventory) {
  QuReFile file;
  std::vector<std::string> lines = detail::read_lines(path);
  std::vector<std::string> problems;
  std::map<std::string, std::size_t> seen_ids;
  bool first = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    if (detail::blank(line)) continue;
    const std::string where = path + ":" + std::to_string(n + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParseError, where + ": " + ex.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::kParseError, where + ": expected an object");
    if (first && j.contains("header")) {
      first = false;
      try {
        file.header = detail::parse_header(j["header"]);
      } catch (const std::exception& ex) {
        throw Error(ErrorCode::kParseError, where + ": bad header: " + ex.what());
      }
      continue;
    }
    first = false;

    QuantifiedRecord rec;
    std::int64_t span_begin = 0, span_end = 0;
    std::string expression, specificity;
    try {
      rec.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      rec.text = j.at("text").get<std::string>();
      rec.quantifier = canonical_lexeme(j.at("quantifier").get<std::string>());
      const auto& span = j.at("span");
      if (!span.is_array() || span.size() != 2) {
        throw Error(ErrorCode::kParseError, "span must be [start, end]");
      }
      span_begin = span[0].get<std::int64_t>();
      span_end = span[1].get<std::int64_t>();
      expression = j.at("expression").get<std::string>();
      specificity = j.at("specificity").get<std::string>();
      if (j.contains("source_entity") && !j["source_entity"].is_null()) {
        rec.source_id = j["source_entity"].get<std::string>();
      }
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::kParseError, where + ": " + ex.what());
    }

    std::vector<std::string> issues;
    if (seen_ids.count(rec.id)) issues.push_back("duplicate id");
    seen_ids[rec.id] = n + 1;
    if (rec.text.empty()) issues.push_back("empty text");
    if (!inventory.contains(rec.quantifier)) {
      issues.push_back("quantifier '" + rec.quantifier + "' not in inventory");
    }
    if (auto s = parse_specificity(specificity)) {
      rec.specificity = *s;
    } else {
      issues.push_back("unknown specificity '" + specificity + "'");
    }
    try {
      rec.gold_expression = parse_expression(expression);
    } catch (const Error& ex) {
      issues.push_back(ex.what());
    }
    std::size_t b = span_begin < 0 ? std::string_view::npos
                                   : detail::codepoint_to_byte(rec.text, static_cast<std::size_t>(span_begin));
    std::size_t e = span_end < 0 ? std::string_view::npos
                                 : detail::codepoint_to_byte(rec.text, static_cast<std::size_t>(span_end));
    if (b == std::string_view::npos || e == std::string_view::npos || b > e) {
      issues.push_back("span out of bounds");
    } else {
      rec.span = Span{b, e};
      try {
        locate_quantifier(rec);
      } catch (const Error&) {
        issues.push_back("span does not contain the quantifier");
      }
    }
    if (!issues.empty()) {
      problems.push_back("'" + rec.id + "' (line " + std::to_string(n + 1) +
                         "): " + detail::join(issues, "; "));
      continue;
    }
    if (percentage_substitution_needs_review(rec)) file.needs_review.push_back(rec.id);
    file.records.push_back(std::move(rec));
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::kValidationError,
                std::to_string(problems.size()) + " invalid record(s) in " + path + ": " +
                    detail::join(problems, " | "));
  }
  if (file.records.empty()) warn(path + " contains no records");
  if (!file.needs_review.empty()) {
    warn(std::to_string(file.needs_review.size()) +
         " record(s) put the percentage after an article: " +
         detail::join(file.needs_review, ", "));
  }
  return file;
}

// Grounds every record's expression. Records whose scope comes out empty are
// reported together.
inline void ground_records(QuReFile& file, const GroundingConfig& cfg,
                           const PercentageGrid& grid) {
  file.scopes.clear();
  std::vector<std::string> problems;
  for (const auto& rec : file.records) {
    try {
      file.scopes.push_back(ground(*rec.gold_expression, cfg, grid));
    } catch (const Error& ex) {
      problems.push_back("'" + rec.id + "': " + ex.what());
    }
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::kValidationError, detail::join(problems, " | "));
  }
}

inline QuReFile load_qure(const std::string& path, const GroundingConfig& cfg,
                          const PercentageGrid& grid,
                          const QuantifierInventory& inventory = QuantifierInventory()) {
  QuReFile file = parse_qure(path, inventory);
  ground_records(file, cfg, grid);
  return file;
}

inline nlohmann::json record_to_json(const QuantifiedRecord& rec) {
  nlohmann::json j;
  j["id"] = rec.id;
  j["text"] = rec.text;
  j["quantifier"] = rec.quantifier;
  j["span"] = {detail::byte_to_codepoint(rec.text, rec.span.begin),
               detail::byte_to_codepoint(rec.text, rec.span.end)};
  j["expression"] = rec.gold_expression ? format_expression(*rec.gold_expression) : "";
  j["specificity"] = rec.specificity ? specificity_name(*rec.specificity) : "";
  j["source_entity"] = rec.source_id;
  return j;
}

inline void write_qure(const QuReFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  if (!file.header.empty()) {
    nlohmann::json h = nlohmann::json::object();
    if (file.header.beta) h["beta"] = file.header.beta->to_string();
    if (file.header.granularity) h["granularity"] = file.header.granularity->to_string();
    if (file.header.window) h["window"] = *file.header.window;
    out << nlohmann::json{{"header", h}}.dump() << "\n";
  }
  for (const auto& rec : file.records) out << record_to_json(rec).dump() << "\n";
}

// Majority label; ties go to the first-listed of the tied labels.
inline std::pair<std::string, bool> majority_label(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> counts;
  std::size_t best = 0;
  for (const auto& l : labels) best = std::max(best, ++counts[l]);
  std::string winner;
  std::size_t winners = 0;
  for (const auto& [label, c] : counts) {
    if (c == best) ++winners;
  }
  for (const auto& l : labels) {
    if (counts[l] == best) {
      winner = l;
      break;
    }
  }
  return {winner, winners > 1};
}

// One JSON object per line: {"concept", "feature", "annotations": [...]}.
inline HvdFile load_hvd(const std::string& path,
                        const QuantifierInventory& inventory = QuantifierInventory()) {
  HvdFile file;
  std::vector<std::string> lines = detail::read_lines(path);
  std::vector<std::string> problems;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (detail::blank(lines[n])) continue;
    const std::string where = path + ":" + std::to_string(n + 1);
    HvdEntry entry;
    try {
      auto j = nlohmann::json::parse(lines[n]);
      entry.triple.concept_name = j.at("concept").get<std::string>();
      entry.triple.feature = j.at("feature").get<std::string>();
      for (const auto& l : j.at("annotations")) {
        entry.labels.push_back(canonical_lexeme(l.get<std::string>()));
      }
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::kParseError, where + ": " + ex.what());
    }
    std::vector<std::string> issues;
    if (entry.triple.concept_name.empty() || entry.triple.feature.empty()) {
      issues.push_back("empty concept or feature");
    }
    if (entry.labels.empty()) issues.push_back("no annotations");
    for (const auto& l : entry.labels) {
      if (!inventory.contains(l)) issues.push_back("unknown quantifier '" + l + "'");
    }
    if (!issues.empty()) {
      problems.push_back(entry.triple.concept_name + "/" + entry.triple.feature + " (line " +
                         std::to_string(n + 1) + "): " + detail::join(issues, "; "));
      continue;
    }
    auto [label, tie] = majority_label(entry.labels);
    entry.triple.quantifier = label;
    entry.tie = tie;
    if (tie) {
      warn(where + ": tied annotations for " + entry.triple.concept_name + "/" +
           entry.triple.feature + ", using first-listed '" + label + "'");
    }
    file.entries.push_back(std::move(entry));
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::kValidationError,
                std::to_string(problems.size()) + " invalid HVD row(s) in " + path + ": " +
                    detail::join(problems, " | "));
  }
  if (file.entries.empty()) warn(path + " contains no HVD rows");
  return file;
}

inline void write_hvd(const HvdFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  for (const auto& e : file.entries) {
    nlohmann::json j = {{"concept", e.triple.concept_name},
                        {"feature", e.triple.feature},
                        {"annotations", e.labels}};
    out << j.dump() << "\n";
  }
}

// Whitespace-separated rows `lexeme scope [count]`, where scope is a grid
// point ("0.2") or a closed pair ("0.1-0.3"). A scope adds `count` to every
// grid point it covers. An optional `beta <value>` row declares the grid.
inline HumanInterpretation load_human_interpretation(
    const std::string& path, const PercentageGrid& grid,
    const QuantifierInventory& inventory = QuantifierInventory()) {
  std::vector<std::string> lines = detail::read_lines(path);
  std::map<std::string, std::vector<double>> counts;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = lines[n];
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string lex, scope, extra;
    if (!(row >> lex)) continue;
    const std::string where = path + ":" + std::to_string(n + 1);
    if (!(row >> scope)) throw Error(ErrorCode::kParseError, where + ": missing scope");
    if (lex == "beta") {
      Rational declared;
      try {
        declared = Rational::parse_decimal(scope);
      } catch (const Error&) {
        throw Error(ErrorCode::kParseError, where + ": bad beta '" + scope + "'");
      }
      if (declared != grid.beta()) {
        throw Error(ErrorCode::kValidationError,
                    where + ": file uses beta " + declared.to_string() + " but the grid has beta " +
                        grid.beta().to_string());
      }
      continue;
    }
    double count = 1.0;
    std::string count_text;
    if (row >> count_text) {
      auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
      if (ec != std::errc() || ptr != count_text.data() + count_text.size() || !(count > 0.0)) {
        throw Error(ErrorCode::kParseError, where + ": bad count '" + count_text + "'");
      }
    }
    if (row >> extra) throw Error(ErrorCode::kParseError, where + ": trailing columns");
    std::string canonical = canonical_lexeme(lex);
    if (!inventory.contains(canonical)) {
      throw Error(ErrorCode::kUnknownQuantifier, where + ": '" + lex + "'");
    }
    PercentageExpression expr;
    try {
      expr = parse_expression(scope);
    } catch (const Error& ex) {
      throw Error(ErrorCode::kParseError, where + ": " + ex.what());
    }
    if (expr.op != ExpressionOp::kExact && expr.op != ExpressionOp::kRange) {
      throw Error(ErrorCode::kParseError, where + ": scope must be a point or a range");
    }
    Rational hi_value = expr.value_hi.value_or(expr.value);
    auto lo = grid.index_of(expr.value);
    auto hi = grid.index_of(hi_value);
    if (!lo || !hi) {
      throw Error(ErrorCode::kValidationError, where + ": '" + scope + "' is not on the grid");
    }
    auto& c = counts[canonical];
    c.resize(grid.size(), 0.0);
    for (std::size_t i = *lo; i <= *hi; ++i) c[i] += count;
  }
  HumanInterpretation human;
  human.steps = grid.steps();
  for (auto& [lex, c] : counts) human.distributions[lex] = normalize_scores(c);
  return human;
}

// Native QuRe rows (a JSON array or JSONL of objects) into internal records.
// Recognized keys, first match wins:
//   text:        quantified_sentence, sentence_q, text
//   expression:  math_expr, expression, percentage_expression
//   source:      wiki_entity, entity, source_entity
//   id:          id, idx (falls back to the row number)
//   span:        quantifier_span, span (code points); otherwise the first
//                whole-word occurrence of the quantifier in the text.
inline QuReFile convert_native_qure(const std::string& path,
                                    const QuantifierInventory& inventory = QuantifierInventory()) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string content = buffer.str();

  std::vector<nlohmann::json> rows;
  auto whole = nlohmann::json::parse(content, nullptr, false);
  if (!whole.is_discarded() && whole.is_array()) {
    for (auto& r : whole) rows.push_back(r);
  } else if (!whole.is_discarded() && whole.is_object() && !whole.contains("quantifier")) {
    for (auto& [key, r] : whole.items()) {
      if (!r.contains("id")) r["id"] = key;
      rows.push_back(r);
    }
  } else {
    std::istringstream lines(content);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      ++n;
      if (detail::blank(line)) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        throw Error(ErrorCode::kParseError, path + ":" + std::to_string(n) + ": invalid JSON");
      }
      rows.push_back(j);
    }
  }

  auto pick = [](const nlohmann::json& j, std::initializer_list<const char*> keys)
      -> const nlohmann::json* {
    for (const char* k : keys) {
      if (j.contains(k) && !j[k].is_null()) return &j[k];
    }
    return nullptr;
  };
  auto as_string = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };

  QuReFile file;
  std::vector<std::string> problems;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& j = rows[n];
    const std::string where = "row " + std::to_string(n + 1);
    if (!j.is_object()) throw Error(ErrorCode::kParseError, path + ": " + where + " is not an object");
    QuantifiedRecord rec;
    const auto* id = pick(j, {"id", "idx"});
    rec.id = id ? as_string(*id) : std::to_string(n + 1);
    const auto* text = pick(j, {"quantified_sentence", "sentence_q", "text"});
    const auto* quant = pick(j, {"quantifier"});
    const auto* expr = pick(j, {"math_expr", "expression", "percentage_expression"});
    const auto* spec_field = pick(j, {"specificity"});
    if (!text || !quant || !expr || !spec_field) {
      problems.push_back(where + ": missing text, quantifier, expression or specificity");
      continue;
    }
    rec.text = as_string(*text);
    rec.quantifier = canonical_lexeme(as_string(*quant));
    if (const auto* src = pick(j, {"wiki_entity", "entity", "source_entity"})) {
      rec.source_id = as_string(*src);
    }
    std::vector<std::string> issues;
    if (!inventory.contains(rec.quantifier)) {
      issues.push_back("quantifier '" + rec.quantifier + "' not in inventory");
    }
    if (auto s = parse_specificity(as_string(*spec_field))) {
      rec.specificity = *s;
    } else {
      issues.push_back("unknown specificity '" + as_string(*spec_field) + "'");
    }
    try {
      rec.gold_expression = parse_expression(as_string(*expr));
    } catch (const Error& ex) {
      issues.push_back(ex.what());
    }
    if (const auto* span = pick(j, {"quantifier_span", "span"});
        span && span->is_array() && span->size() == 2) {
      std::size_t b = std::string_view::npos, e = std::string_view::npos;
      if ((*span)[0].is_number_unsigned() && (*span)[1].is_number_unsigned()) {
        b = detail::codepoint_to_byte(rec.text, (*span)[0].get<std::size_t>());
        e = detail::codepoint_to_byte(rec.text, (*span)[1].get<std::size_t>());
      }
      if (b == std::string_view::npos || e == std::string_view::npos || b > e) {
        issues.push_back("span out of bounds");
      } else {
        rec.span = Span{b, e};
        try {
          locate_quantifier(rec);
        } catch (const Error&) {
          issues.push_back("span does not contain the quantifier");
        }
      }
    } else {
      std::optional<std::size_t> pos;
      for (const auto& form : {rec.quantifier, surface_form(rec.quantifier, true)}) {
        if ((pos = detail::find_word(rec.text, form, 0, rec.text.size()))) {
          rec.span = Span{*pos, *pos + form.size()};
          break;
        }
      }
      if (!pos) issues.push_back("quantifier not found in text");
    }
    if (!issues.empty()) {
      problems.push_back(where + " ('" + rec.id + "'): " + detail::join(issues, "; "));
      continue;
    }
    file.records.push_back(std::move(rec));
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::kValidationError, std::to_string(problems.size()) +
                                                 " unconvertible row(s) in " + path + ": " +
                                                 detail::join(problems, " | "));
  }
  return file;
}

// Internal records back to native rows (JSON array).
inline void write_native_qure(const QuReFile& file, const std::string& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& rec : file.records) {
    rows.push_back({
        {"id", rec.id},
        {"quantified_sentence", rec.text},
        {"quantifier", rec.quantifier},
        {"quantifier_span", {detail::byte_to_codepoint(rec.text, rec.span.begin),
                             detail::byte_to_codepoint(rec.text, rec.span.end)}},
        {"math_expr", rec.gold_expression ? format_expression(*rec.gold_expression) : ""},
        {"specificity", rec.specificity ? specificity_name(*rec.specificity) : ""},
        {"wiki_entity", rec.source_id},
    });
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << rows.dump(2) << "\n";
}

}  // namespace presque
