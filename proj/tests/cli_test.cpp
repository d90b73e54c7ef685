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

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(PRESQUE_WORK_DIR) / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  Result Run(const std::string& args) {
    fs::path out = dir_ / "stdout.txt";
    fs::path err = dir_ / "stderr.txt";
    std::string cmd = std::string("env -u PRESQUE_SCORER_URL '") + PRESQUE_CLI + "' " + args +
                      " > '" + out.string() + "' 2> '" + err.string() + "'";
    int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(out);
    r.err = Slurp(err);
    return r;
  }

  fs::path dir_;
};

std::string Data(const char* name) { return std::string("'") + PRESQUE_DATA_DIR + "/" + name + "'"; }

constexpr char kInferArgs[] =
    "--beta 0.25 --quantifiers all most some --prior '" PRESQUE_DATA_DIR
    "/prior_uniform.txt' --mock-table '" PRESQUE_TEST_DATA_DIR
    "/infer_mock.jsonl' --k 2 infer -s 'Some apples are red.' --span 0:4";

// Listener columns printed for a grid point, e.g. "25%  0.300000  0.272093".
std::vector<double> Columns(const std::string& out, const std::string& pct) {
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string label;
    double l0, l1;
    if (row >> label >> l0 >> l1 && label == pct) return {l0, l1};
  }
  return {};
}

TEST_F(CliTest, InferMatchesGolden) {
  Result r = Run(kInferArgs);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, Slurp(fs::path(PRESQUE_TEST_DATA_DIR) / "infer_golden.txt"));
}

// The golden numbers recomputed from the mock table with a uniform prior.
TEST_F(CliTest, InferAgreesWithHandComputation) {
  Result r = Run(kInferArgs);
  ASSERT_EQ(r.code, 0) << r.err;
  const double l0[3][5] = {{0.02, 0.05, 0.1, 0.3, 0.9},   // all
                           {0.02, 0.1, 0.5, 0.8, 0.3},    // most
                           {0.1, 0.6, 0.8, 0.4, 0.1}};    // some
  const double s0_some[5] = {0.05, 0.7, 0.5, 0.3, 0.1};
  double prior[5] = {0, 0, 0, 0, 0};
  for (const auto& row : l0) {
    double sum = 0;
    for (double v : row) sum += v;
    for (int i = 0; i < 5; ++i) prior[i] += row[i] / sum / 3.0;
  }
  double l1[5], l1_sum = 0;
  for (int i = 0; i < 5; ++i) l1_sum += (l1[i] = s0_some[i] * prior[i]);
  const char* pcts[] = {"0%", "25%", "50%", "75%", "100%"};
  for (int i = 0; i < 5; ++i) {
    std::vector<double> cols = Columns(r.out, pcts[i]);
    ASSERT_EQ(cols.size(), 2u) << pcts[i];
    EXPECT_NEAR(cols[0], l0[2][i] / 2.0, 5e-7) << pcts[i];
    EXPECT_NEAR(cols[1], l1[i] / l1_sum, 5e-7) << pcts[i];
  }
  EXPECT_NE(r.out.find("L0 top-2: 50% 25%"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("L1 top-2: 50% 25%"), std::string::npos) << r.out;
}

TEST_F(CliTest, InferJsonOutput) {
  std::string out = (dir_ / "infer.json").string();
  Result r = Run(std::string("--out '") + out + "' " + kInferArgs);
  ASSERT_EQ(r.code, 0) << r.err;
  std::string json = Slurp(out);
  EXPECT_NE(json.find("\"L1\""), std::string::npos) << json;
}

TEST_F(CliTest, MissingSpanIsUsageError) {
  Result r = Run("infer -s 'Some apples are red.'");
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST_F(CliTest, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(Run("frobnicate").code, 2);
  EXPECT_EQ(Run("").code, 2);
}

TEST_F(CliTest, UnreachableScorerExitsThree) {
  Result r = Run(
      "--scorer remote --scorer-url http://127.0.0.1:1 infer -s 'Some apples are red.' "
      "--span 0:4");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, RemoteWithoutUrlIsUsageError) {
  Result r = Run("--scorer remote infer -s 'Some apples are red.' --span 0:4");
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST_F(CliTest, EvalIsByteIdenticalAcrossRuns) {
  std::string base = "--mock-table '" PRESQUE_MOCK_QURE "' ";
  fs::path a = dir_ / "a", b = dir_ / "b";
  Result ra = Run(base + "--out '" + a.string() + "' eval " + Data("qure_sample.jsonl"));
  ASSERT_EQ(ra.code, 0) << ra.err;
  Result rb = Run(base + "--threads 4 --out '" + b.string() + "' eval " +
                  Data("qure_sample.jsonl"));
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_EQ(ra.out, rb.out);
  for (const char* f : {"records.csv", "aggregate.csv", "report.json"}) {
    std::string x = Slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, Slurp(b / f)) << f;
  }
  EXPECT_NE(ra.out.find("Total"), std::string::npos);
}

TEST_F(CliTest, PriorMissingQuantifierIsValidationError) {
  fs::path prior = dir_ / "prior.txt";
  std::ofstream(prior) << "all 1\nmost 2\n";
  Result r = Run("--mock-table '" PRESQUE_MOCK_QURE "' --prior '" + prior.string() + "' eval " +
                 Data("qure_sample.jsonl"));
  EXPECT_EQ(r.code, 4) << r.err;
  EXPECT_NE(r.err.find("prior"), std::string::npos) << r.err;
}

TEST_F(CliTest, KLargerThanGridIsValidationError) {
  Result r = Run("--beta 0.5 --k 4 --mock-table '" PRESQUE_MOCK_QURE "' eval " +
                 Data("qure_sample.jsonl"));
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(CliTest, CompareHuman) {
  Result r = Run("--mock-table '" PRESQUE_MOCK_HVD "' --out '" + dir_.string() +
                 "' compare-human " + Data("hvd_sample.jsonl") + " " + Data("human_sample.txt"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cross-entropy L1"), std::string::npos);
  EXPECT_FALSE(Slurp(dir_ / "plot.csv").empty());
  EXPECT_FALSE(Slurp(dir_ / "comparison.json").empty());
}

TEST_F(CliTest, CompareHumanGridMismatchIsValidationError) {
  Result r = Run("--beta 0.05 --mock-table '" PRESQUE_MOCK_HVD "' compare-human " +
                 Data("hvd_sample.jsonl") + " " + Data("human_sample.txt"));
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(CliTest, Ground) {
  Result r = Run("ground '~0.59' '<0.01' '0.24-0.4'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "~0.59\t[0.55, 0.65]\n<0.01\t[0, 0]\n0.24-0.4\t[0.2, 0.4]\n");
  EXPECT_EQ(Run("ground '<0'").code, 4);
  EXPECT_EQ(Run("--beta 0.03 ground 0.5").code, 4);
}

TEST_F(CliTest, ConvertRoundTrip) {
  fs::path native = dir_ / "native.json";
  fs::path back = dir_ / "back.jsonl";
  ASSERT_EQ(Run("convert --from internal --to native " + Data("qure_sample.jsonl") + " '" +
                native.string() + "'")
                .code,
            0);
  ASSERT_EQ(Run("convert --from native --to internal '" + native.string() + "' '" +
                back.string() + "'")
                .code,
            0);
  Result a = Run("--mock-table '" PRESQUE_MOCK_QURE "' eval " + Data("qure_sample.jsonl"));
  Result b = Run("--mock-table '" PRESQUE_MOCK_QURE "' eval '" + back.string() + "'");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, ConfigFile) {
  fs::path cfg = dir_ / "run.toml";
  std::ofstream(cfg) << "[grid]\nbeta = \"0.1\"\n[grounding]\nwindow = 1\n";
  Result r = Run("--config '" + cfg.string() + "' ground '~0.59'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "~0.59\t[0.5, 0.6]\n");

  std::ofstream(cfg) << "grid.beta = \"0.1\"\n";
  r = Run("--config '" + cfg.string() + "' ground '~0.59'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "~0.59\t[0.5, 0.7]\n");

  std::ofstream(cfg) << "[grid]\nbeta_typo = \"0.1\"\n";
  EXPECT_EQ(Run("--config '" + cfg.string() + "' ground '~0.59'").code, 2);
}

}  // namespace
