//
// Copyright 2026 The dpsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// End-to-end checks of the command line surface. Each command runs in a
// subprocess; exit codes follow the 0/1/2 contract.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"

#include "dpsynth/rng.hpp"

namespace dpsynth {
namespace {

namespace fs = std::filesystem;

int RunCommand(const std::string& args, const fs::path& stdout_path) {
  const std::string command = std::string(DPSYNTH_CLI_PATH) + " " + args +
                              " > " + stdout_path.string() + " 2> " +
                              stdout_path.string() + ".err";
  const int status = std::system(command.c_str());
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "dpsynth_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    WriteToyCsv(dir_ / "toy.csv", 80, 1);
    WriteToyCsv(dir_ / "toy_test.csv", 40, 2);
    std::ofstream config(dir_ / "small_config.txt");
    config << "num_teachers = 4\nbatch_size = 4\nhidden_units = 8\n"
           << "noise_dim = 3\nproj_dims = 2\nmax_iterations = 12\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Two labeled clusters, raw units.
  static void WriteToyCsv(const fs::path& path, int count, uint64_t seed) {
    RngStream rng(seed);
    std::ofstream out(path);
    out << "x,y,label\n";
    for (int i = 0; i < count; ++i) {
      const int label = i % 2;
      const double center = label == 1 ? 0.5 : -0.5;
      out << center + 0.1 * rng.Gaussian() << ','
          << center + 0.1 * rng.Gaussian() << ',' << label << '\n';
    }
  }

  std::string ConfigArgs() const {
    return "--preset toy --label label --data " + (dir_ / "toy.csv").string();
  }

  fs::path dir_;
};

TEST_F(CliTest, FullPipelineTrainGenerateEval) {
  const fs::path run = dir_ / "run";
  const fs::path out = dir_ / "out.txt";
  fs::copy_file(dir_ / "small_config.txt", dir_ / "config.txt");
  {
    std::ofstream config(dir_ / "config.txt", std::ios::app);
    config << "checkpoint_every = 6\n";
  }
  ASSERT_EQ(RunCommand("train " + ConfigArgs() + " --config " +
                           (dir_ / "config.txt").string() + " --out " +
                           run.string() + " --seed 7 --dump-tallies 4",
                       out),
            0)
      << ReadFile(fs::path(out.string() + ".err"));
  EXPECT_TRUE(fs::exists(run / "generator.json"));
  EXPECT_TRUE(fs::exists(run / "scaler.json"));
  EXPECT_TRUE(fs::exists(run / "ratios.json"));
  EXPECT_TRUE(fs::exists(run / "privacy_report.json"));
  EXPECT_TRUE(fs::exists(run / "run.log"));
  EXPECT_TRUE(fs::exists(run / "config.txt"));
  EXPECT_TRUE(fs::exists(run / "checkpoints/iter_000006.json"));
  EXPECT_TRUE(fs::exists(run / "tallies/iter_000004.csv"));

  // 12 log lines, one per iteration.
  std::istringstream log(ReadFile(run / "run.log"));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 12);

  const fs::path synthetic = dir_ / "synthetic.csv";
  ASSERT_EQ(RunCommand("generate --run " + run.string() + " --count 200 --out " +
                           synthetic.string() + " --seed 3",
                       out),
            0);
  ASSERT_TRUE(fs::exists(synthetic));

  ASSERT_EQ(RunCommand("eval --synthetic " + synthetic.string() + " --real " +
                           (dir_ / "toy_test.csv").string() +
                           " --label label --seed 5",
                       out),
            0);
  const nlohmann::json report = nlohmann::json::parse(ReadFile(out));
  EXPECT_EQ(report.at("classifier"), "logistic-regression");
  EXPECT_GE(report.at("auroc").get<double>(), 0.0);
  EXPECT_LE(report.at("auroc").get<double>(), 1.0);
  EXPECT_EQ(report.at("train_size").get<int>(), 200);

  ASSERT_EQ(RunCommand("report --run " + run.string(), out), 0);
  const std::string report_text = ReadFile(out);
  EXPECT_NE(report_text.find("epsilon:"), std::string::npos);
  EXPECT_NE(report_text.find("gaussian-threshold"), std::string::npos);
}

TEST_F(CliTest, GenerateCountZeroWritesHeaderOnlyCsv) {
  const fs::path run = dir_ / "run0";
  const fs::path out = dir_ / "out.txt";
  ASSERT_EQ(RunCommand("train " + ConfigArgs() + " --out " + run.string() +
                           " --iterations 1 --config " +
                           (dir_ / "small_config.txt").string() + " --seed 1",
                       out),
            0)
      << ReadFile(fs::path(out.string() + ".err"));
  const fs::path empty_csv = dir_ / "empty.csv";
  ASSERT_EQ(RunCommand("generate --run " + run.string() +
                           " --count 0 --out " + empty_csv.string(),
                       out),
            0);
  EXPECT_EQ(ReadFile(empty_csv), "x,y,label\n");
}

TEST_F(CliTest, UnconditionalTrainOmitsLabelColumn) {
  // No --label: trains unconditionally, no ratios file, CSV without labels.
  const fs::path run = dir_ / "run_uncond";
  const fs::path out = dir_ / "out.txt";
  ASSERT_EQ(RunCommand("train --preset toy --data " +
                           (dir_ / "toy.csv").string() + " --config " +
                           (dir_ / "small_config.txt").string() +
                           " --iterations 2 --out " + run.string(),
                       out),
            0)
      << ReadFile(fs::path(out.string() + ".err"));
  EXPECT_FALSE(fs::exists(run / "ratios.json"));
  const fs::path csv = dir_ / "uncond.csv";
  ASSERT_EQ(RunCommand("generate --run " + run.string() +
                           " --count 3 --out " + csv.string(),
                       out),
            0);
  std::istringstream lines(ReadFile(csv));
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "x,y,label");  // label was an ordinary feature here
}

TEST_F(CliTest, ReportOnUntrainedRunShowsZeroEpsilon) {
  const fs::path run = dir_ / "never_trained";
  fs::create_directories(run);
  const fs::path out = dir_ / "out.txt";
  ASSERT_EQ(RunCommand("report --run " + run.string(), out), 0);
  const std::string text = ReadFile(out);
  EXPECT_NE(text.find("epsilon: 0"), std::string::npos);
  EXPECT_NE(text.find("delta:"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  const fs::path out = dir_ / "out.txt";
  EXPECT_EQ(RunCommand("train", out), 1);           // missing required flags
  EXPECT_EQ(RunCommand("no-such-command", out), 1);
  EXPECT_EQ(RunCommand("", out), 1);
}

TEST_F(CliTest, RuntimeErrorsExitTwo) {
  const fs::path out = dir_ / "out.txt";
  EXPECT_EQ(RunCommand("train --data " + (dir_ / "absent.csv").string() +
                           " --out " + (dir_ / "r").string(),
                       out),
            2);
  EXPECT_EQ(RunCommand("generate --run " + (dir_ / "absent").string() +
                           " --count 1 --out " + (dir_ / "g.csv").string(),
                       out),
            2);
}

TEST_F(CliTest, HelpExitsZero) {
  const fs::path out = dir_ / "out.txt";
  EXPECT_EQ(RunCommand("--help", out), 0);
}

}  // namespace
}  // namespace dpsynth
