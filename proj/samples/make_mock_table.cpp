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

// Writes a mock entailment table covering every query the listeners issue
// for a QuRe or HVD file. Entailment follows a bump around a hand-picked
// prototype percentage per quantifier, so the sample pipeline produces
// sensible rankings without a model.
//
//   make_mock_table qure data/qure_sample.jsonl 0.05 out.jsonl
//   make_mock_table hvd data/hvd_sample.jsonl 0.1 out.jsonl

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "presque/presque.hpp"

namespace {

struct Prototype {
  double center;
  double width;
};

const std::map<std::string, Prototype>& prototypes() {
  static const std::map<std::string, Prototype> kTable = {
      {"all", {1.0, 0.06}},         {"generally", {0.8, 0.12}}, {"most", {0.7, 0.12}},
      {"usually", {0.75, 0.12}},    {"some", {0.3, 0.15}},      {"likely", {0.65, 0.15}},
      {"few", {0.12, 0.08}},        {"little", {0.1, 0.08}},    {"occasionally", {0.2, 0.1}},
      {"none", {0.0, 0.04}},        {"seldom", {0.1, 0.06}},    {"tiny", {0.04, 0.04}},
      {"small", {0.12, 0.1}},       {"moderate", {0.45, 0.12}}, {"large", {0.7, 0.15}},
  };
  return kTable;
}

double bump(const std::string& lexeme, double p) {
  const Prototype& proto = prototypes().at(lexeme);
  double z = (p - proto.center) / proto.width;
  double e = 0.01 + 0.9 * std::exp(-0.5 * z * z);
  // Three decimals keep the table small; the value stays inside (0, 1).
  return std::round(e * 1000.0) / 1000.0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 5) {
    std::fprintf(stderr, "usage: %s qure|hvd INPUT BETA OUTPUT\n", argv[0]);
    return 2;
  }
  const std::string kind = argv[1];
  presque::QuantifierInventory inventory;
  presque::PercentageGrid grid = presque::make_grid(std::string(argv[3]));
  std::vector<presque::QuantifiedRecord> records;
  if (kind == "qure") {
    records = presque::parse_qure(argv[2], inventory).records;
  } else {
    records = presque::load_hvd(argv[2], inventory).records();
  }

  std::map<std::pair<std::string, std::string>, double> table;
  for (const auto& rec : records) {
    for (const auto& lex : inventory.lexemes()) {
      presque::QuantifiedRecord rewritten = presque::with_quantifier(rec, lex);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double p = grid.value(i);
        std::string pct = presque::substitute_percentage(rewritten, grid.point(i));
        // Literal listener and prior: quantified sentence entails percentage.
        table[{rewritten.text, pct}] = bump(lex, p);
        // Speaker: percentage sentence entails quantified sentence.
        table[{presque::substitute_percentage(rec, grid.point(i)), rewritten.text}] = bump(lex, p);
      }
    }
  }

  std::ofstream out(argv[4]);
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", argv[4]);
    return 1;
  }
  for (const auto& [key, e] : table) {
    nlohmann::json j = {{"premise", key.first}, {"hypothesis", key.second}, {"entail", e}};
    out << j.dump() << "\n";
  }
  std::fprintf(stderr, "%zu entries\n", table.size());
  return 0;
}
