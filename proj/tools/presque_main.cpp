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

// Command-line front end.
//
// Sample usage:
//   presque infer --sentence "Some apples are red." --span 0:4
//   presque --scorer remote --cache scores.tsv eval qure.jsonl --out results/
//   presque --beta 0.1 compare-human hvd.jsonl human.txt --out hvd/
//   presque ground "~0.59" ">=0.45"
//   presque convert --to internal QuRe.json qure.jsonl
//
// Exit codes: 0 ok, 2 usage, 3 scorer failure, 4 validation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "presque/presque.hpp"
#include "presque/scorer_remote.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitScorer = 3;
constexpr int kExitValidation = 4;

// TOML sections map onto dotted option names: [grid] beta -> --grid.beta.
class DottedConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> out;
    for (CLI::ConfigItem item : CLI::ConfigTOML::from_config(input)) {
      if (item.parents.empty()) {
        out.push_back(std::move(item));
        continue;
      }
      if (item.name == "++" || item.name == "--") continue;
      std::string name;
      for (const auto& p : item.parents) name += p + ".";
      item.name = name + item.name;
      item.parents.clear();
      out.push_back(std::move(item));
    }
    return out;
  }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string beta;
  std::string granularity = "0.01";
  int window = 2;
  std::size_t k = 5;
  std::vector<std::size_t> consecutive_ks = {3, 4, 5};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::string scorer = "mock";
  std::string scorer_url;
  std::string mock_table;
  std::string cache;
  std::string prior;
  std::string out;
  std::vector<std::string> quantifiers;
  std::size_t threads = 1;
  std::size_t max_batch = 64;
};

// Owns the backend and, when a cache file is configured, the caching layer.
class ScorerStack {
 public:
  explicit ScorerStack(const RunConfig& cfg) {
    if (cfg.scorer == "mock") {
      auto mock = std::make_unique<presque::MockScorer>();
      if (!cfg.mock_table.empty()) *mock = presque::MockScorer::load(cfg.mock_table);
      backend_ = std::move(mock);
    } else {
      std::string url = cfg.scorer_url.empty() ? presque::scorer_url_from_env() : cfg.scorer_url;
      if (url.empty()) {
        throw UsageError("--scorer remote needs --scorer-url or PRESQUE_SCORER_URL");
      }
      presque::RemoteScorerConfig rc;
      rc.url = url;
      rc.max_batch = cfg.max_batch;
      backend_ = std::make_unique<presque::RemoteScorer>(rc);
    }
    if (!cfg.cache.empty()) {
      cache_ = std::make_unique<presque::ScoreCache>(cfg.cache);
      cached_ = std::make_unique<presque::CachedScorer>(*backend_, *cache_);
    }
  }

  presque::Scorer& get() { return cached_ ? *cached_ : *backend_; }

 private:
  std::unique_ptr<presque::Scorer> backend_;
  std::unique_ptr<presque::ScoreCache> cache_;
  std::unique_ptr<presque::CachedScorer> cached_;
};

presque::QuantifierInventory make_inventory(const RunConfig& cfg) {
  if (cfg.quantifiers.empty()) return presque::QuantifierInventory();
  std::vector<std::string> lexemes;
  for (const auto& q : cfg.quantifiers) lexemes.push_back(presque::canonical_lexeme(q));
  return presque::QuantifierInventory(lexemes);
}

presque::QuantifierPrior make_prior(const RunConfig& cfg,
                                    const presque::QuantifierInventory& inventory) {
  if (cfg.prior.empty()) return presque::QuantifierPrior::from_word_frequencies(inventory);
  return presque::QuantifierPrior::load(cfg.prior, inventory);
}

presque::GroundingConfig make_grounding(const RunConfig& cfg) {
  presque::GroundingConfig g;
  g.granularity = presque::Rational::parse_decimal(cfg.granularity);
  g.window = cfg.window;
  g.validate();
  return g;
}

presque::EvalConfig make_eval_config(const RunConfig& cfg) {
  presque::EvalConfig e;
  e.k = cfg.k;
  e.consecutive_ks = cfg.consecutive_ks;
  e.random_seeds = cfg.seeds;
  e.threads = cfg.threads;
  return e;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw presque::Error(presque::ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

std::filesystem::path output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_infer(const RunConfig& cfg, const std::string& sentence, const std::string& span_text,
              const std::string& quantifier) {
  auto colon = span_text.find_first_of(":,");
  if (colon == std::string::npos) throw UsageError("--span expects START:END");
  std::size_t cp_begin = 0, cp_end = 0;
  try {
    cp_begin = std::stoul(span_text.substr(0, colon));
    cp_end = std::stoul(span_text.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--span expects START:END");
  }
  presque::QuantifiedRecord rec;
  rec.id = "cli";
  rec.text = sentence;
  std::size_t b = presque::detail::codepoint_to_byte(sentence, cp_begin);
  std::size_t e = presque::detail::codepoint_to_byte(sentence, cp_end);
  if (b == std::string::npos || e == std::string::npos || b > e) {
    throw presque::Error(presque::ErrorCode::kSpanOutOfBounds, "span outside the sentence");
  }
  rec.span = {b, e};
  rec.quantifier = presque::canonical_lexeme(quantifier.empty() ? sentence.substr(b, e - b)
                                                                : quantifier);
  auto inventory = make_inventory(cfg);
  if (!inventory.contains(rec.quantifier)) {
    throw presque::Error(presque::ErrorCode::kUnknownQuantifier,
                         "'" + rec.quantifier + "' (pass --quantifier when the span is a phrase)");
  }
  auto grid = presque::make_grid(cfg.beta.empty() ? "0.05" : cfg.beta);
  auto prior = make_prior(cfg, inventory);
  ScorerStack scorer(cfg);
  auto report = presque::infer(rec, grid, scorer.get(), prior, cfg.k);
  presque::write_inference_text(report, rec, grid, std::cout);
  if (!cfg.out.empty()) {
    auto out = open_output(cfg.out);
    out << presque::inference_to_json(report, rec, grid).dump(2) << "\n";
  }
  return 0;
}

int run_eval(const RunConfig& cfg, const std::string& dataset) {
  auto inventory = make_inventory(cfg);
  presque::QuReFile file = presque::parse_qure(dataset, inventory);
  std::string beta = cfg.beta;
  if (beta.empty()) beta = file.header.beta ? file.header.beta->to_string() : "0.05";
  auto grid = presque::make_grid(beta);
  presque::GroundingConfig grounding = make_grounding(cfg);
  presque::ground_records(file, grounding, grid);
  auto prior = make_prior(cfg, inventory);
  ScorerStack scorer(cfg);
  auto report = presque::evaluate_dataset(file, grid, scorer.get(), prior, make_eval_config(cfg));
  presque::write_summary(report, std::cout);
  if (!cfg.out.empty()) {
    auto dir = output_dir(cfg);
    auto records = open_output(dir / "records.csv");
    presque::write_records_csv(report, records);
    auto aggregate = open_output(dir / "aggregate.csv");
    presque::write_aggregate_csv(report, aggregate);
    auto json = open_output(dir / "report.json");
    json << presque::report_to_json(report).dump(2) << "\n";
  }
  return 0;
}

int run_compare_human(const RunConfig& cfg, const std::string& hvd_path,
                      const std::string& human_path) {
  auto inventory = make_inventory(cfg);
  auto grid = presque::make_grid(cfg.beta.empty() ? "0.1" : cfg.beta);
  presque::HvdFile hvd = presque::load_hvd(hvd_path, inventory);
  presque::HumanInterpretation human =
      presque::load_human_interpretation(human_path, grid, inventory);
  auto prior = make_prior(cfg, inventory);
  ScorerStack scorer(cfg);
  auto cmp = presque::compare_human(hvd.records(), human, grid, scorer.get(), prior, inventory);
  std::printf("cross-entropy L0: %.6f\n", cmp.ce_l0);
  std::printf("cross-entropy L1: %.6f\n", cmp.ce_l1);
  std::printf("human entropy:    %.6f\n", cmp.human_entropy);
  for (const auto& lex : cmp.l1.missing_quantifiers) {
    if (human.distributions.count(lex)) std::printf("no HVD sentences for '%s'\n", lex.c_str());
  }
  if (!cfg.out.empty()) {
    auto dir = output_dir(cfg);
    auto plot = open_output(dir / "plot.csv");
    presque::write_plot_csv(cmp, human, grid, plot);
    nlohmann::json j = {{"ce_l0", cmp.ce_l0},
                        {"ce_l1", cmp.ce_l1},
                        {"human_entropy", cmp.human_entropy},
                        {"missing_quantifiers", cmp.l1.missing_quantifiers}};
    auto json = open_output(dir / "comparison.json");
    json << j.dump(2) << "\n";
  }
  return 0;
}

int run_ground(const RunConfig& cfg, const std::vector<std::string>& expressions) {
  auto grid = presque::make_grid(cfg.beta.empty() ? "0.05" : cfg.beta);
  auto grounding = make_grounding(cfg);
  for (const auto& e : expressions) {
    std::cout << e << "\t" << presque::to_string(presque::ground(e, grounding, grid)) << "\n";
  }
  return 0;
}

int run_convert(const RunConfig& cfg, const std::string& from, const std::string& to,
                const std::string& input, const std::string& output) {
  auto inventory = make_inventory(cfg);
  presque::QuReFile file = from == "native" ? presque::convert_native_qure(input, inventory)
                                            : presque::parse_qure(input, inventory);
  if (to == "native") {
    presque::write_native_qure(file, output);
  } else {
    presque::write_qure(file, output);
  }
  std::cerr << "converted " << file.records.size() << " record(s)\n";
  return 0;
}

int exit_code_for(presque::ErrorCode code) {
  using presque::ErrorCode;
  switch (code) {
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kProtocolError:
      return kExitScorer;
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Percentage-scope inference for generalized quantifiers"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML configuration file");
  app.config_formatter(std::make_shared<DottedConfig>());
  app.allow_config_extras(false);

  RunConfig cfg;
  app.add_option("--beta,--grid.beta", cfg.beta, "Grid step (default 0.05; 0.1 for compare-human)");
  app.add_option("--granularity,--grounding.granularity", cfg.granularity, "Grounding granularity g");
  app.add_option("--window,--grounding.window", cfg.window, "Grounding window w");
  app.add_option("--k", cfg.k, "K for F1@K, MSD@K and primary scopes");
  app.add_option("--consecutive-k", cfg.consecutive_ks, "K values for consecutiveness");
  app.add_option("--seeds", cfg.seeds, "Seeds of the random baseline");
  app.add_option("--scorer", cfg.scorer, "Entailment backend")
      ->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--scorer-url", cfg.scorer_url, "Remote scorer base URL");
  app.add_option("--mock-table", cfg.mock_table, "JSONL lookup table for the mock scorer")
      ->check(CLI::ExistingFile);
  app.add_option("--cache", cfg.cache, "Append-only score cache file");
  app.add_option("--prior", cfg.prior, "Quantifier prior override (lexeme weight)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", cfg.out, "Output file (infer) or directory");
  app.add_option("--quantifiers,--inventory.quantifiers", cfg.quantifiers,
                 "Quantifier inventory override");
  app.add_option("--threads", cfg.threads, "Worker threads for per-record evaluation");
  app.add_option("--max-batch", cfg.max_batch, "Pairs per remote request");

  std::string sentence, span, quantifier;
  auto* infer = app.add_subcommand("infer", "L0/L1 distributions for one sentence");
  infer->add_option("--sentence,-s", sentence, "Quantified sentence")->required();
  infer->add_option("--span", span, "Quantifier span START:END (code points)")->required();
  infer->add_option("--quantifier", quantifier, "Lexeme, when the span is a phrase");

  std::string dataset;
  auto* eval = app.add_subcommand("eval", "Evaluate L0, L1 and a random baseline on QuRe data");
  eval->add_option("dataset", dataset, "QuRe JSONL file")->required()->check(CLI::ExistingFile);

  std::string hvd_path, human_path;
  auto* compare = app.add_subcommand("compare-human", "Cross-entropy against human interpretations");
  compare->add_option("hvd", hvd_path, "HVD JSONL file")->required()->check(CLI::ExistingFile);
  compare->add_option("human", human_path, "Human interpretation table")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> expressions;
  auto* ground = app.add_subcommand("ground", "Ground percentage expressions onto the grid");
  ground->add_option("expressions", expressions, "Expressions such as ~0.59")->required();

  std::string from = "native", to = "internal", input, output;
  auto* convert = app.add_subcommand("convert", "Convert QuRe between native and internal formats");
  convert->add_option("--from", from)->check(CLI::IsMember({"native", "internal"}));
  convert->add_option("--to", to)->check(CLI::IsMember({"native", "internal"}));
  convert->add_option("input", input)->required()->check(CLI::ExistingFile);
  convert->add_option("output", output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  presque::warning_sink() = [](std::string_view msg) { std::cerr << "warning: " << msg << "\n"; };
  try {
    if (*infer) return run_infer(cfg, sentence, span, quantifier);
    if (*eval) return run_eval(cfg, dataset);
    if (*compare) return run_compare_human(cfg, hvd_path, human_path);
    if (*ground) return run_ground(cfg, expressions);
    if (*convert) return run_convert(cfg, from, to, input, output);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const presque::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
