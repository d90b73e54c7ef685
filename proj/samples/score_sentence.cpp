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

// Runs both listeners on one sentence with a tiny hand-written mock table and
// prints the top grid points.

#include <cstdio>
#include <string>

#include "presque/presque.hpp"

int main() {
  presque::QuantifiedRecord rec;
  rec.id = "demo";
  rec.text = "Most students passed the exam.";
  rec.quantifier = "most";
  rec.span = {0, 4};

  presque::PercentageGrid grid = presque::make_grid("0.1");
  presque::MockScorer scorer;
  // Entailment peaks around 70-90% for "most".
  const double curve[] = {0.0, 0.0, 0.01, 0.02, 0.05, 0.1, 0.3, 0.7, 0.9, 0.8, 0.4};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    scorer.set_entail(rec.text, presque::substitute_percentage(rec, grid.point(i)), curve[i]);
  }

  presque::QuantifierInventory inventory({"all", "most", "some"});
  auto prior = presque::QuantifierPrior::from_word_frequencies(inventory);
  auto report = presque::infer(rec, grid, scorer, prior, 3);
  for (const auto* d : {&report.l0, &report.l1}) {
    presque::RankedPrediction pred(*d);
    std::printf("%s top-3:", presque::listener_name(d->kind));
    for (std::size_t r = 0; r < 3; ++r) {
      std::printf(" %s", presque::render_percentage(grid.point(pred.entries()[r].index)).c_str());
    }
    std::printf("\n");
  }
  return 0;
}
