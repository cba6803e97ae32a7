// Copyright 2026 The PyramidNet Authors
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

#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "pyramidnet/cli.hpp"
#include "pyramidnet/pyramid.hpp"
#include "test_util.hpp"

namespace pyramidnet::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(f, line);) lines.push_back(line);
  return lines;
}

std::string without_wall_clock(const std::vector<std::string>& lines) {
  std::string all;
  for (const auto& l : lines) all += l.substr(0, l.rfind(',')) + "\n";
  return all;
}

TEST(CliParsing, Architecture) {
  EXPECT_EQ(parse_architecture("4, 4,2"), (std::vector<int>{4, 4, 2}));
  EXPECT_THROW(parse_architecture("4"), ConfigError);
  EXPECT_THROW(parse_architecture("2,4"), ConfigError);
  EXPECT_THROW(parse_architecture("4,x"), ConfigError);
  EXPECT_THROW(parse_architecture("4,,2"), ConfigError);
  EXPECT_THROW(parse_architecture("4,0"), ConfigError);
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli({"--help"}).code, kOk);
  EXPECT_EQ(run_cli({}).code, kConfigError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--epochs", "many"}).code, kConfigError);
}

TEST(CliTrain, SyntheticRunWritesMetrics) {
  testing::TempDir dir("cli_train");
  const Result r = run_cli({"train", "--data", "synthetic", "--arch", "4,2", "--epochs", "3", "--train-size", "400",
                            "--test-size", "200", "--out-dir", dir.path().string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("final_test_accuracy="), std::string::npos);
  const auto lines = read_lines(dir.path() / "metrics_pyramid.csv");
  ASSERT_GT(lines.size(), 1u);
  EXPECT_EQ(lines[0], "epoch,minibatch,train_loss,test_accuracy,wall_ms");
  EXPECT_EQ(lines.size(), 1u + 3 * 8);
}

TEST(CliTrain, DeterministicGivenSeed) {
  testing::TempDir a("cli_det_a");
  testing::TempDir b("cli_det_b");
  for (const auto* d : {&a, &b}) {
    ASSERT_EQ(run_cli({"train", "--arch", "4,4,2", "--epochs", "2", "--train-size", "300", "--seed", "9",
                       "--updater", "pyramid,svb", "--out-dir", d->path().string()})
                  .code,
              kOk);
  }
  for (const char* name : {"metrics_pyramid.csv", "metrics_svb.csv"}) {
    EXPECT_EQ(without_wall_clock(read_lines(a.path() / name)), without_wall_clock(read_lines(b.path() / name)));
  }
}

TEST(CliTrain, ConfigFileWithFlagOverride) {
  testing::TempDir dir("cli_cfg");
  {
    std::ofstream f(dir.path() / "cfg.json");
    f << R"({"arch": [4, 2], "epochs": 1, "train_size": 200, "test_size": 50, "bias": true, "lr": 0.2})";
  }
  const Result r = run_cli({"train", "--config", (dir.path() / "cfg.json").string(), "--epochs", "2", "--out-dir",
                            dir.path().string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(read_lines(dir.path() / "metrics_pyramid.csv").size(), 1u + 2 * 4);
}

TEST(CliTrain, ConfigErrors) {
  testing::TempDir dir("cli_cfg_bad");
  {
    std::ofstream f(dir.path() / "bad.json");
    f << "{not json";
    std::ofstream g(dir.path() / "unknown.json");
    g << R"({"warp_factor": 9})";
  }
  EXPECT_EQ(run_cli({"train", "--config", (dir.path() / "bad.json").string()}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--config", (dir.path() / "unknown.json").string()}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--config", (dir.path() / "missing.json").string()}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--arch", "2,4"}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--data", "cifar"}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--updater", "adam"}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--lr", "-1"}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--data", "mnist", "--arch", "4,2", "--pca", "8"}).code, kConfigError);
  EXPECT_EQ(run_cli({"train", "--data", "mnist", "--arch", "4,2", "--classes", "1,2,3"}).code, kConfigError);
}

TEST(CliTrain, MissingDatasetIsDataError) {
  testing::TempDir dir("cli_nodata");
  const Result r = run_cli({"train", "--data", "mnist", "--data-dir", (dir.path() / "none").string(), "--out-dir",
                            dir.path().string()});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
}

TEST(CliTrain, SavedModelRoundTrips) {
  testing::TempDir dir("cli_model");
  const auto model = (dir.path() / "model.json").string();
  ASSERT_EQ(run_cli({"train", "--arch", "4,4,2", "--bias", "--epochs", "1", "--train-size", "100", "--save-model",
                     model, "--out-dir", dir.path().string()})
                .code,
            kOk);
  const Network net = load_network_json(model);
  EXPECT_EQ(net.architecture(), (std::vector<int>{4, 4, 2}));
  ASSERT_TRUE(net.layers()[0].bias.has_value());
  save_network_json(net, dir.path() / "again.json");
  const Network again = load_network_json(dir.path() / "again.json");
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_TRUE(std::equal(net.layers()[l].pyramid.angles().begin(), net.layers()[l].pyramid.angles().end(),
                           again.layers()[l].pyramid.angles().begin()));
  }
}

TEST(CliQsimVerify, DefaultRunPasses) {
  const Result r = run_cli({"qsim-verify"});
  ASSERT_EQ(r.code, kOk) << r.out;
  const std::regex line(R"(^[a-z]+\[n=\d+\]=(pass|fail):\S+$)");
  std::istringstream in(r.out);
  int checks = 0;
  for (std::string l; std::getline(in, l);) {
    if (l.rfind("qsim-verify:", 0) == 0) continue;
    EXPECT_TRUE(std::regex_match(l, line)) << l;
    EXPECT_NE(l.find("=pass:"), std::string::npos) << l;
    ++checks;
  }
  EXPECT_EQ(checks, 4 * 9);
}

TEST(CliQsimVerify, InjectedFaultFails) {
  const Result r = run_cli({"qsim-verify", "--max-n", "4", "--inject-bad-angle"});
  EXPECT_EQ(r.code, kCheckFailure);
  EXPECT_NE(r.out.find("equivalence[n=3]=fail"), std::string::npos);
}

TEST(CliQsimVerify, SizeCap) {
  EXPECT_EQ(run_cli({"qsim-verify", "--max-n", "12", "--min-n", "12", "--layers", "2", "--vectors", "2"}).code, kOk);
  EXPECT_EQ(run_cli({"qsim-verify", "--max-n", "13"}).code, kConfigError);
}

TEST(CliTomoDemo, AnalyticIsExact) {
  const Result r = run_cli({"tomo-demo", "--analytic"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const std::regex err_re(R"(linf_error=(\S+))");
  int seen = 0;
  for (auto it = std::sregex_iterator(r.out.begin(), r.out.end(), err_re); it != std::sregex_iterator(); ++it) {
    EXPECT_LE(std::stod((*it)[1]), 1e-10);
    ++seen;
  }
  EXPECT_EQ(seen, 4);
}

TEST(CliTomoDemo, ShotsWithNoise) {
  const Result r = run_cli({"tomo-demo", "--shots", "100000", "--noise", "0.01"});
  ASSERT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("procedure=pairwise mitigation=on"), std::string::npos);
  EXPECT_NE(r.out.find("procedure=ancilla mitigation=off"), std::string::npos);
  EXPECT_EQ(run_cli({"tomo-demo", "--noise", "1.5"}).code, kConfigError);
}

TEST(CliBench, WritesOneRowPerSize) {
  testing::TempDir dir("cli_bench");
  const auto csv = (dir.path() / "bench.csv").string();
  const Result r = run_cli({"bench-scaling", "--sizes", "8,16,32", "--reps", "3", "--out", csv});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto lines = read_lines(csv);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "n,pyramid_ms,svb_ms");
  EXPECT_EQ(lines[1].substr(0, 2), "8,");
  EXPECT_NE(r.out.find("ratio_trend="), std::string::npos);
}

TEST(CliExport, ZeroLayerIsIdentity) {
  testing::TempDir dir("cli_export");
  const auto csv = dir.path() / "w.csv";
  ASSERT_EQ(run_cli({"export-matrix", "--init", "zero", "--n", "4", "--out", csv.string()}).code, kOk);
  EXPECT_EQ(import_matrix_csv(csv), Mat::identity(4));
}

TEST(CliExport, RandomRoundTripAndSignMask) {
  testing::TempDir dir("cli_export2");
  const auto csv = dir.path() / "w.csv";
  const Result r = run_cli({"export-matrix", "--n", "6", "--seed", "4", "--out", csv.string()});
  ASSERT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("sign_mask=none"), std::string::npos);
  Mat w = import_matrix_csv(csv);
  for (std::size_t c = 0; c < 6; ++c) w(0, c) = -w(0, c);
  export_matrix_csv(w, dir.path() / "neg.csv");
  const Result neg = run_cli({"export-matrix", "--import", (dir.path() / "neg.csv").string()});
  EXPECT_EQ(neg.code, kOk);
  EXPECT_NE(neg.out.find("determinant=-1 sign_mask=5"), std::string::npos) << neg.out;

  export_matrix_csv(scaled(Mat::identity(3), 2.0), dir.path() / "bad.csv");
  EXPECT_EQ(run_cli({"export-matrix", "--import", (dir.path() / "bad.csv").string()}).code, kCheckFailure);
  EXPECT_EQ(run_cli({"export-matrix", "--n", "4", "--n-out", "5"}).code, kConfigError);
}

TEST(CliExport, FromSavedModel) {
  testing::TempDir dir("cli_export3");
  const auto model = (dir.path() / "m.json").string();
  ASSERT_EQ(run_cli({"train", "--arch", "4,4,2", "--epochs", "1", "--train-size", "100", "--save-model", model,
                     "--out-dir", dir.path().string()})
                .code,
            kOk);
  const auto csv = dir.path() / "l0.csv";
  const Result r = run_cli({"export-matrix", "--model", model, "--layer", "0", "--out", csv.string()});
  ASSERT_EQ(r.code, kOk);
  const Network net = load_network_json(model);
  EXPECT_EQ(import_matrix_csv(csv), matrix_from_angles(net.layers()[0].pyramid));
  EXPECT_EQ(run_cli({"export-matrix", "--model", model, "--layer", "5"}).code, kConfigError);
}

}  // namespace
}  // namespace pyramidnet::cli
