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

#include "dpsynth/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"

#include "oracles.hpp"

namespace dpsynth {
namespace {

using testing::PluralityOracle;

TEST(BinGridTest, ZeroMapsToUpperMiddleBin) {
  const BinGrid grid(1e-4, 10);
  EXPECT_EQ(grid.BinIndex(0.0), 5);
  EXPECT_NEAR(grid.Midpoint(5), 1e-5, 1e-18);
}

TEST(BinGridTest, ClampsToClipRange) {
  const BinGrid grid(1e-4, 10);
  EXPECT_EQ(grid.BinIndex(1e-3), 9);
  EXPECT_EQ(grid.BinIndex(-1e-3), 0);
  EXPECT_EQ(grid.BinIndex(1e-4), 9);  // top boundary belongs to the last bin
}

TEST(BinGridTest, LowerEdgeIsBinZero) {
  const BinGrid grid(1e-4, 4);
  EXPECT_EQ(grid.BinIndex(-1e-4), 0);
  EXPECT_NEAR(grid.Midpoint(0), -1e-4 + 0.25e-4, 1e-18);
}

TEST(BinGridTest, MidpointsSymmetricAboutZeroForEvenBins) {
  const BinGrid grid(0.5, 8);
  for (int b = 0; b < 8; ++b) {
    EXPECT_NEAR(grid.Midpoint(b), -grid.Midpoint(7 - b), 1e-15);
  }
}

TEST(BinGridTest, RejectsBadParameters) {
  EXPECT_THROW(BinGrid(0.0, 10), std::invalid_argument);
  EXPECT_THROW(BinGrid(1.0, 1), std::invalid_argument);
}

TEST(DiscretizeTest, RejectsNonFiniteValues) {
  const BinGrid grid(1.0, 4);
  const std::vector<double> bad = {0.5, std::nan("")};
  EXPECT_THROW(Discretize(bad, grid), std::invalid_argument);
}

TEST(TallyTest, UnanimousVotes) {
  const std::vector<std::vector<int>> votes = {{2}, {2}, {2}};
  const VoteTally tally = Tally(votes, 5);
  EXPECT_EQ(tally.dims, 1);
  EXPECT_EQ(tally.At(0, 2), 3);
  EXPECT_EQ(std::accumulate(tally.counts.begin(), tally.counts.end(), 0), 3);
}

TEST(TallyTest, SplitVotes) {
  const std::vector<std::vector<int>> votes = {{0}, {0}, {1}};
  const VoteTally tally = Tally(votes, 4);
  EXPECT_EQ(tally.At(0, 0), 2);
  EXPECT_EQ(tally.At(0, 1), 1);
  EXPECT_EQ(tally.At(0, 2), 0);
}

TEST(TallyTest, EmptyTeacherSetGivesZeroTally) {
  const VoteTally tally = Tally({}, 4);
  EXPECT_EQ(tally.dims, 0);
  EXPECT_TRUE(tally.counts.empty());
}

TEST(TallyTest, RowSumsEqualTeacherCount) {
  RngStream rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.UniformBelow(10));
    const int k = 1 + static_cast<int>(rng.UniformBelow(5));
    const int bins = 2 + static_cast<int>(rng.UniformBelow(7));
    std::vector<std::vector<int>> votes(n, std::vector<int>(k));
    for (auto& row : votes) {
      for (int& v : row) v = static_cast<int>(rng.UniformBelow(bins));
    }
    const VoteTally tally = Tally(votes, bins);
    for (int dim = 0; dim < k; ++dim) {
      int sum = 0;
      for (int b = 0; b < bins; ++b) sum += tally.At(dim, b);
      EXPECT_EQ(sum, n);
    }
  }
}

TEST(TallyTest, CsvDumpHasHeaderAndOneRowPerDimension) {
  const std::vector<std::vector<int>> votes = {{0, 2}, {1, 2}};
  const VoteTally tally = Tally(votes, 3);
  EXPECT_EQ(TallyToCsv(tally), "bin0,bin1,bin2\n1,1,0\n0,0,2\n");
}

TEST(ConfidentGnmaxTest, ZeroNoisePlainArgmax) {
  RngStream rng(1);
  const std::vector<int> counts = {5, 3, 0};
  const GnmaxOutcome outcome = ConfidentGnmax(counts, 4.0, 0.0, 0.0, rng);
  EXPECT_TRUE(outcome.passed);
  EXPECT_EQ(outcome.winner, 0);
  EXPECT_EQ(outcome.n1, 5);
  EXPECT_EQ(outcome.n2, 3);
  EXPECT_EQ(outcome.n3, 0);
}

TEST(ConfidentGnmaxTest, ZeroNoiseBelowThresholdRejects) {
  RngStream rng(1);
  const std::vector<int> counts = {2, 2, 1};
  const GnmaxOutcome outcome = ConfidentGnmax(counts, 3.0, 0.0, 0.0, rng);
  EXPECT_FALSE(outcome.passed);
  EXPECT_EQ(outcome.n1, 2);
  EXPECT_EQ(outcome.n2, 2);
  EXPECT_EQ(outcome.n3, 1);
}

TEST(ConfidentGnmaxTest, ZeroNoiseTiesBreakToLowestIndex) {
  RngStream rng(1);
  const std::vector<int> counts = {3, 3};
  const GnmaxOutcome outcome = ConfidentGnmax(counts, 0.0, 0.0, 0.0, rng);
  EXPECT_TRUE(outcome.passed);
  EXPECT_EQ(outcome.winner, 0);
}

TEST(ConfidentGnmaxTest, LargeGapWinsAlmostAlways) {
  RngStream rng(99);
  const std::vector<int> counts = {100, 0};
  int wins = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const GnmaxOutcome outcome = ConfidentGnmax(counts, 0.0, 1.0, 1.0, rng);
    ASSERT_TRUE(outcome.passed);
    if (outcome.winner == 0) ++wins;
  }
  EXPECT_GE(static_cast<double>(wins) / trials, 0.999);
}

TEST(ConfidentGnmaxTest, TrueCountsReportedRegardlessOfNoise) {
  RngStream rng(7);
  const std::vector<int> counts = {4, 9, 1, 1};
  const GnmaxOutcome outcome = ConfidentGnmax(counts, 1.0, 3.0, 3.0, rng);
  EXPECT_EQ(outcome.n1, 9);
  EXPECT_EQ(outcome.n2, 4);
  EXPECT_EQ(outcome.n3, 1);
}

TEST(DpGradAggTest, UnanimousTeachersReproduceDiscretizedGradient) {
  const int d = 4;
  const int k = 2;
  const BinGrid grid(1e-4, 10);
  const ProjectionPair projection = MakeProjection(d, k, 77);
  const std::vector<double> gradient = {5e-5, -3e-5, 1e-5, -9e-5};
  const std::vector<std::vector<double>> gradients(6, gradient);
  RngStream rng(1);
  const std::vector<double> aggregated =
      DpGradAgg(gradients, grid, projection, 0.5, 0.0, 0.0, nullptr, "q", rng);

  std::vector<double> winners(k);
  const std::vector<int> bins = Discretize(ProjectDown(gradient, projection), grid);
  for (int i = 0; i < k; ++i) winners[i] = grid.Midpoint(bins[i]);
  const std::vector<double> expected = ProjectUp(winners, projection);
  EXPECT_EQ(aggregated, expected);
}

TEST(DpGradAggTest, OppositeGradientsRejectEveryDimension) {
  const int d = 3;
  const BinGrid grid(1e-4, 2);
  const ProjectionPair projection = MakeProjection(d, 2, 5);
  const std::vector<double> up = {1e-4, 1e-4, 1e-4};
  std::vector<double> down(d);
  for (int i = 0; i < d; ++i) down[i] = -up[i];
  RngStream rng(1);
  PrivacyLedger ledger;
  AggregationOutcome outcome;
  // Tiny but positive noise so the ledger can be charged; a margin of one
  // full vote cannot be flipped by sigma = 1e-12.
  const std::vector<double> aggregated =
      DpGradAgg({up, down}, grid, projection, 1.0, 1e-12, 1e-12, &ledger, "q",
                rng, &outcome);
  for (double v : aggregated) EXPECT_DOUBLE_EQ(v, 0.0);
  for (const AggregationRecord& rec : outcome.dims) {
    EXPECT_FALSE(rec.passed);
    EXPECT_EQ(rec.n1, 1);
  }
  // Threshold cost only.
  EXPECT_EQ(ledger.QueryCount(), 1u);
  EXPECT_EQ(ledger.entries()[0].kind, MechanismKind::kGaussianThreshold);
}

TEST(DpGradAggTest, LedgerGrowsByOnePlusPassedDimensions) {
  const int d = 5;
  const int k = 3;
  const BinGrid grid(1e-4, 6);
  RngStream rng(21);
  RngStream data_rng(4);
  PrivacyLedger ledger;
  std::size_t previous = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> gradients(8, std::vector<double>(d));
    for (auto& g : gradients) {
      for (double& v : g) v = (2.0 * data_rng.Uniform01() - 1.0) * 1e-4;
    }
    const ProjectionPair projection = MakeProjection(d, k, 100 + trial);
    AggregationOutcome outcome;
    DpGradAgg(gradients, grid, projection, 0.5, 2.0, 2.0, &ledger,
              "q" + std::to_string(trial), rng, &outcome);
    std::size_t passed = 0;
    for (const AggregationRecord& rec : outcome.dims) passed += rec.passed;
    EXPECT_EQ(ledger.QueryCount() - previous, 1 + passed);
    previous = ledger.QueryCount();
  }
}

TEST(DpGradAggTest, TeacherOrderDoesNotChangeZeroNoiseOutcome) {
  const int d = 4;
  const BinGrid grid(1e-4, 8);
  const ProjectionPair projection = MakeProjection(d, 2, 13);
  RngStream data_rng(9);
  std::vector<std::vector<double>> gradients(7, std::vector<double>(d));
  for (auto& g : gradients) {
    for (double& v : g) v = (2.0 * data_rng.Uniform01() - 1.0) * 1e-4;
  }
  RngStream rng(1);
  const std::vector<double> base =
      DpGradAgg(gradients, grid, projection, 0.5, 0.0, 0.0, nullptr, "q", rng);
  std::reverse(gradients.begin(), gradients.end());
  const std::vector<double> reversed =
      DpGradAgg(gradients, grid, projection, 0.5, 0.0, 0.0, nullptr, "q", rng);
  EXPECT_EQ(base, reversed);
}

TEST(DpGradAggTest, MatchesPluralityOracleOnRandomInstances) {
  RngStream meta(31337);
  for (int instance = 0; instance < 200; ++instance) {
    const int n = 2 + static_cast<int>(meta.UniformBelow(9));
    const int d = 1 + static_cast<int>(meta.UniformBelow(6));
    const int k = 1 + static_cast<int>(meta.UniformBelow(
                          static_cast<uint64_t>(std::min(d, 3))));
    const int bins = 2 + static_cast<int>(meta.UniformBelow(7));
    const double clip = meta.Uniform01() < 0.5 ? 1e-4 : 0.5;
    const double threshold = 0.1 + 0.8 * meta.Uniform01();
    const BinGrid grid(clip, bins);
    const ProjectionPair projection = MakeProjection(d, k, meta.NextU64());
    std::vector<std::vector<double>> gradients(n, std::vector<double>(d));
    for (auto& g : gradients) {
      for (double& v : g) v = (2.0 * meta.Uniform01() - 1.0) * 1.5 * clip;
    }
    RngStream rng(1);
    const std::vector<double> aggregated = DpGradAgg(
        gradients, grid, projection, threshold, 0.0, 0.0, nullptr, "q", rng);
    const std::vector<double> expected =
        PluralityOracle(gradients, clip, bins, projection, threshold);
    ASSERT_EQ(aggregated, expected) << "instance " << instance;
  }
}

TEST(DpGradAggTest, OutputBoundedByProjectionNorm) {
  const int d = 6;
  const int k = 3;
  const double clip = 1e-4;
  const BinGrid grid(clip, 10);
  const ProjectionPair projection = MakeProjection(d, k, 2024);
  RngStream data_rng(2);
  std::vector<std::vector<double>> gradients(5, std::vector<double>(d));
  for (auto& g : gradients) {
    for (double& v : g) v = (2.0 * data_rng.Uniform01() - 1.0) * clip;
  }
  RngStream rng(3);
  AggregationOutcome outcome;
  const std::vector<double> aggregated =
      DpGradAgg(gradients, grid, projection, 0.2, 0.0, 0.0, nullptr, "q", rng,
                &outcome);
  const double half_width = grid.Width() / 2.0;
  for (const AggregationRecord& rec : outcome.dims) {
    if (rec.passed) {
      EXPECT_LE(std::abs(rec.midpoint), clip - half_width + 1e-18);
    } else {
      EXPECT_DOUBLE_EQ(rec.midpoint, 0.0);
    }
  }
  double frobenius = 0.0;
  for (double entry : projection.forward) frobenius += entry * entry;
  frobenius = std::sqrt(frobenius);
  double out_norm = 0.0;
  for (double v : aggregated) out_norm += v * v;
  out_norm = std::sqrt(out_norm);
  EXPECT_LE(out_norm, frobenius * clip * std::sqrt(static_cast<double>(k)));
}

TEST(DpGradAggTest, RejectsDimensionMismatch) {
  const BinGrid grid(1e-4, 4);
  const ProjectionPair projection = MakeProjection(4, 2, 1);
  RngStream rng(1);
  const std::vector<std::vector<double>> bad = {{1e-5, 1e-5, 1e-5}};
  EXPECT_THROW(
      DpGradAgg(bad, grid, projection, 0.5, 0.0, 0.0, nullptr, "q", rng),
      std::invalid_argument);
}

}  // namespace
}  // namespace dpsynth
