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

#include "dpsynth/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gtest/gtest.h"

namespace dpsynth {
namespace {

TEST(GaussianThresholdRdpTest, MatchesClosedForm) {
  const RdpCurve curve = GaussianThresholdRdp(1000.0, {20.0});
  ASSERT_EQ(curve.epsilons.size(), 1u);
  EXPECT_DOUBLE_EQ(curve.epsilons[0], 1.0e-5);
}

TEST(GaussianThresholdRdpTest, UnitSigmaOrderTwo) {
  const RdpCurve curve = GaussianThresholdRdp(1.0, {2.0});
  EXPECT_DOUBLE_EQ(curve.epsilons[0], 1.0);
}

TEST(GaussianThresholdRdpTest, LargeSigmaTwoOrders) {
  const RdpCurve curve = GaussianThresholdRdp(3000.0, {2.0, 100.0});
  EXPECT_NEAR(curve.epsilons[0], 1.111e-7, 1e-10);
  EXPECT_NEAR(curve.epsilons[1], 5.555e-6, 1e-9);
}

TEST(GaussianThresholdRdpTest, RejectsBadParameters) {
  EXPECT_THROW(GaussianThresholdRdp(0.0, {2.0}), std::invalid_argument);
  EXPECT_THROW(GaussianThresholdRdp(-1.0, {2.0}), std::invalid_argument);
  EXPECT_THROW(GaussianThresholdRdp(1.0, {1.0}), std::invalid_argument);
  EXPECT_THROW(GaussianThresholdRdp(1.0, {}), std::invalid_argument);
}

TEST(GaussianThresholdRdpTest, ScalesLinearlyInOrderQuadraticallyInSigma) {
  const RdpCurve base = GaussianThresholdRdp(7.0, {3.0});
  const RdpCurve doubled_order = GaussianThresholdRdp(7.0, {6.0});
  const RdpCurve doubled_sigma = GaussianThresholdRdp(14.0, {3.0});
  EXPECT_DOUBLE_EQ(doubled_order.epsilons[0], 2.0 * base.epsilons[0]);
  EXPECT_DOUBLE_EQ(doubled_sigma.epsilons[0], base.epsilons[0] / 4.0);
}

TEST(GnmaxDataDependentRdpTest, MatchesTheoremFormula) {
  // Gap 400 with sigma 100: order 100, epsilon exp(-0.02)/100.
  const GnmaxRdp rdp = GnmaxDataDependentRdp(1000.0, 600.0, 0.0, 100.0);
  ASSERT_TRUE(rdp.applicable);
  EXPECT_DOUBLE_EQ(rdp.order, 100.0);
  EXPECT_NEAR(rdp.epsilon, 9.802e-3, 1e-6);
  EXPECT_DOUBLE_EQ(rdp.epsilon, std::exp(-0.02) / 100.0);
}

TEST(GnmaxDataDependentRdpTest, LargeGapLargeSigma) {
  const GnmaxRdp rdp = GnmaxDataDependentRdp(10000.0, 6000.0, 0.0, 1000.0);
  ASSERT_TRUE(rdp.applicable);
  EXPECT_DOUBLE_EQ(rdp.order, 1000.0);
  EXPECT_NEAR(rdp.epsilon, 9.98e-4, 1e-6);
}

TEST(GnmaxDataDependentRdpTest, ZeroGapFallsBack) {
  const GnmaxRdp rdp = GnmaxDataDependentRdp(5.0, 5.0, 0.0, 1.0);
  EXPECT_FALSE(rdp.applicable);
}

TEST(GnmaxDataDependentRdpTest, GateRequiresBothMargins) {
  // n1 - n2 large but n2 - n3 below 4 sigma.
  EXPECT_FALSE(GnmaxDataDependentRdp(1000.0, 600.0, 590.0, 100.0).applicable);
  // n2 - n3 fine but order below 2 even though n1 - n2 passes 4 sigma.
  EXPECT_FALSE(GnmaxDataDependentRdp(15.0, 8.0, 0.0, 1.0).applicable);
  EXPECT_TRUE(GnmaxDataDependentRdp(16.0, 8.0, 0.0, 1.0).applicable);
}

TEST(GnmaxDataDependentRdpTest, RejectsBadCounts) {
  EXPECT_THROW(GnmaxDataDependentRdp(1.0, 2.0, 0.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(GnmaxDataDependentRdp(2.0, 1.0, -1.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(GnmaxDataDependentRdp(2.0, 1.0, 0.0, 0.0),
               std::invalid_argument);
}

TEST(GnmaxDataDependentRdpTest, EpsilonDecreasesInGap) {
  const double sigma = 10.0;
  double previous = std::numeric_limits<double>::infinity();
  for (double gap = 8 * sigma; gap <= 40 * sigma; gap += sigma) {
    const GnmaxRdp rdp =
        GnmaxDataDependentRdp(1000.0 + gap, 1000.0, 0.0, sigma);
    ASSERT_TRUE(rdp.applicable);
    EXPECT_LT(rdp.epsilon, previous);
    previous = rdp.epsilon;
  }
}

TEST(RdpToDpTest, SinglePointConversion) {
  RdpCurve curve;
  curve.orders = {100.0};
  curve.epsilons = {0.05};
  const DpGuarantee dp = RdpToDp(curve, 1e-5);
  EXPECT_NEAR(dp.epsilon, 0.05 + std::log(1e5) / 99.0, 1e-12);
  EXPECT_NEAR(dp.epsilon, 0.16628, 1e-4);
  EXPECT_DOUBLE_EQ(dp.witness_order, 100.0);
}

TEST(RdpToDpTest, ZeroCostCurveLeavesConversionOverheadOnly) {
  RdpCurve curve;
  curve.orders = {2.0, 1e6};
  curve.epsilons = {0.0, 0.0};
  const DpGuarantee dp = RdpToDp(curve, 0.5);
  EXPECT_NEAR(dp.epsilon, std::log(2.0) / (1e6 - 1.0), 1e-15);
  EXPECT_DOUBLE_EQ(dp.witness_order, 1e6);
}

TEST(RdpToDpTest, WitnessMatchesBruteForceMinimum) {
  RdpCurve curve;
  curve.orders = {2.0, 100.0};
  curve.epsilons = {0.5, 0.01};
  const double delta = 1e-2;
  const DpGuarantee dp = RdpToDp(curve, delta);
  double best = std::numeric_limits<double>::infinity();
  double best_order = 0.0;
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    const double cand =
        curve.epsilons[i] + std::log(1.0 / delta) / (curve.orders[i] - 1.0);
    if (cand < best) {
      best = cand;
      best_order = curve.orders[i];
    }
  }
  EXPECT_DOUBLE_EQ(dp.epsilon, best);
  EXPECT_DOUBLE_EQ(dp.witness_order, best_order);
  EXPECT_DOUBLE_EQ(best_order, 100.0);
}

TEST(RdpToDpTest, TiesBreakTowardSmallerOrder) {
  // With delta = 0.5: order 2 gives 0 + log2, order 3 gives
  // log2/2 + log2/2, the same double. The smaller order must win.
  RdpCurve curve;
  curve.orders = {2.0, 3.0};
  curve.epsilons = {0.0, std::log(2.0) / 2.0};
  const DpGuarantee dp = RdpToDp(curve, 0.5);
  EXPECT_DOUBLE_EQ(dp.epsilon, std::log(2.0));
  EXPECT_DOUBLE_EQ(dp.witness_order, 2.0);
}

TEST(RdpToDpTest, RejectsBadDelta) {
  RdpCurve curve;
  curve.orders = {2.0};
  curve.epsilons = {0.1};
  EXPECT_THROW(RdpToDp(curve, 0.0), std::invalid_argument);
  EXPECT_THROW(RdpToDp(curve, 1.0), std::invalid_argument);
  EXPECT_THROW(RdpToDp(RdpCurve{}, 0.5), std::invalid_argument);
}

TEST(RdpToDpTest, MonotoneInDelta) {
  RdpCurve curve = GaussianThresholdRdp(50.0, DefaultOrderGrid());
  double previous = 0.0;
  for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double epsilon = RdpToDp(curve, delta).epsilon;
    EXPECT_GE(epsilon, previous);
    previous = epsilon;
  }
}

TEST(PrivacyLedgerTest, EmptyLedgerComposesToZero) {
  PrivacyLedger ledger;
  for (double epsilon : ledger.Composed().epsilons) {
    EXPECT_DOUBLE_EQ(epsilon, 0.0);
  }
  EXPECT_DOUBLE_EQ(ledger.FinalGuarantee(1e-5).epsilon, 0.0);
}

TEST(PrivacyLedgerTest, IdenticalEntriesAddPointwise) {
  // Two identical single-order curves: 0.01 at order 2 each.
  PrivacyLedger ledger(std::vector<double>{2.0});
  const double sigma = 10.0;  // 2 / (2 * 100) = 0.01
  ledger.AddGaussianThreshold("a", sigma);
  ledger.AddGaussianThreshold("b", sigma);
  ASSERT_EQ(ledger.Composed().epsilons.size(), 1u);
  EXPECT_DOUBLE_EQ(ledger.Composed().epsilons[0], 0.02);
}

TEST(PrivacyLedgerTest, ThousandQueriesClosedFormSum) {
  PrivacyLedger ledger(std::vector<double>{100.0});
  for (int i = 0; i < 1000; ++i) {
    ledger.AddGaussianThreshold("q" + std::to_string(i), 3000.0);
  }
  EXPECT_NEAR(ledger.Composed().epsilons[0], 5.556e-3, 1e-6);
  // Incremental accumulation vs. the closed-form product.
  EXPECT_NEAR(ledger.Composed().epsilons[0], 1000.0 * 100.0 / (2.0 * 9e6),
              1e-12);
}

TEST(PrivacyLedgerTest, ComposedMatchesPerEntrySum) {
  PrivacyLedger ledger;
  ledger.AddGaussianThreshold("t0", 8.0, 4);
  ledger.AddGnmax("g0", 100.0, 10.0, 0.0, 4.0);   // applicable
  ledger.AddGnmax("g1", 5.0, 4.0, 3.0, 4.0);      // fallback
  ledger.AddLaplace("l0", 0.01);
  const RdpCurve& composed = ledger.Composed();
  for (std::size_t i = 0; i < composed.orders.size(); ++i) {
    double expected = 0.0;
    for (const PrivacyLedger::Entry& entry : ledger.entries()) {
      expected += entry.EpsilonAt(composed.orders[i]);
    }
    EXPECT_DOUBLE_EQ(composed.epsilons[i], expected) << composed.orders[i];
  }
}

TEST(PrivacyLedgerTest, DataDependentOrderJoinsGrid) {
  PrivacyLedger ledger;
  ledger.AddGaussianThreshold("t", 100.0);
  // Gap 410 -> order 102.5, absent from the default grid.
  const GnmaxRdp rdp = ledger.AddGnmax("g", 500.0, 90.0, 0.0, 10.0);
  ASSERT_TRUE(rdp.applicable);
  const RdpCurve& composed = ledger.Composed();
  const auto it = std::find(composed.orders.begin(), composed.orders.end(),
                            102.5);
  ASSERT_NE(it, composed.orders.end());
  const std::size_t idx = it - composed.orders.begin();
  // Threshold entry evaluated at the inserted order plus the data-dependent
  // epsilon (tighter than the fallback at its own order).
  const double expected =
      102.5 / (2.0 * 100.0 * 100.0) +
      std::min(rdp.epsilon, 102.5 / (10.0 * 10.0));
  EXPECT_DOUBLE_EQ(composed.epsilons[idx], expected);
}

TEST(PrivacyLedgerTest, AppendNeverDecreasesComposedEpsilon) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> sigma_dist(0.5, 50.0);
  PrivacyLedger ledger;
  RdpCurve previous = ledger.Composed();
  for (int i = 0; i < 50; ++i) {
    if (i % 3 == 0) {
      ledger.AddGaussianThreshold("t" + std::to_string(i), sigma_dist(rng));
    } else {
      const double sigma = sigma_dist(rng);
      const double gap = sigma * (rng() % 10);
      ledger.AddGnmax("g" + std::to_string(i), 1000.0 + gap, 1000.0, 0.0,
                      sigma);
    }
    const RdpCurve& current = ledger.Composed();
    // Compare on the orders shared with the previous grid.
    std::size_t j = 0;
    for (std::size_t k = 0; k < previous.orders.size(); ++k) {
      while (current.orders[j] != previous.orders[k]) ++j;
      EXPECT_GE(current.epsilons[j], previous.epsilons[k]);
    }
    previous = current;
  }
}

TEST(PrivacyLedgerTest, LaplaceSideChannelAddsAfterConversion) {
  PrivacyLedger ledger;
  ledger.AddLaplace("ratio", 0.01);
  ledger.AddLaplace("other", 0.02);
  EXPECT_DOUBLE_EQ(ledger.LaplaceTotal(), 0.03);
  // Pure-epsilon ledger: no conversion overhead at all.
  EXPECT_DOUBLE_EQ(ledger.FinalGuarantee(1e-5).epsilon, 0.03);

  ledger.AddGaussianThreshold("t", 100.0);
  const double rdp_part = ledger.ComposedToDp(1e-5).epsilon;
  EXPECT_DOUBLE_EQ(ledger.FinalGuarantee(1e-5).epsilon, rdp_part + 0.03);
}

TEST(PrivacyLedgerTest, RejectsNonPositiveLaplaceEpsilon) {
  PrivacyLedger ledger;
  EXPECT_THROW(ledger.AddLaplace("bad", 0.0), std::invalid_argument);
  EXPECT_THROW(ledger.AddLaplace("bad", -0.5), std::invalid_argument);
}

TEST(PrivacyLedgerTest, ClosedFormMatchesBruteForceGridMinimizer) {
  // Pure Gaussian-threshold ledger: k queries cost k*order/(2 sigma^2).
  const double sigma = 40.0;
  const int k = 500;
  const double delta = 1e-5;
  PrivacyLedger ledger;
  for (int i = 0; i < k; ++i) {
    ledger.AddGaussianThreshold("q" + std::to_string(i), sigma);
  }
  const DpGuarantee dp = ledger.ComposedToDp(delta);
  // Independent brute-force minimum of the closed form over the grid,
  // evaluated in long double.
  long double best = std::numeric_limits<long double>::infinity();
  for (double order : DefaultOrderGrid()) {
    const long double cand =
        static_cast<long double>(k) * order / (2.0L * sigma * sigma) +
        std::log(1.0L / delta) / (order - 1.0L);
    best = std::min(best, cand);
  }
  EXPECT_NEAR(dp.epsilon, static_cast<double>(best),
              1e-6 * static_cast<double>(best));
}

TEST(PrivacyLedgerTest, ReportHasExactSchema) {
  PrivacyLedger ledger;
  ledger.AddGaussianThreshold("q0/threshold", 8.0, 2);
  ledger.AddGnmax("q0/dim0", 100.0, 20.0, 0.0, 4.0);  // gate passes, order 20
  ledger.AddLaplace("class-ratio", 0.01);
  const nlohmann::ordered_json report = ledger.Report(1e-5);
  ASSERT_TRUE(report.contains("queries"));
  ASSERT_TRUE(report.contains("composed"));
  ASSERT_TRUE(report.contains("final"));
  for (const auto& query : report["queries"]) {
    EXPECT_TRUE(query.contains("id"));
    EXPECT_TRUE(query.contains("kind"));
    EXPECT_TRUE(query.contains("sigma"));
    EXPECT_TRUE(query.contains("lambda"));
    EXPECT_TRUE(query.contains("epsilon_rdp"));
    EXPECT_EQ(query.size(), 5u);
  }
  EXPECT_TRUE(report["composed"].contains("orders"));
  EXPECT_TRUE(report["composed"].contains("epsilons"));
  const auto& final = report["final"];
  EXPECT_TRUE(final.contains("epsilon"));
  EXPECT_TRUE(final.contains("delta"));
  EXPECT_TRUE(final.contains("witness_order"));
  EXPECT_TRUE(final.contains("laplace_extra"));
  EXPECT_DOUBLE_EQ(final["laplace_extra"].get<double>(), 0.01);
  EXPECT_EQ(report["queries"][0]["kind"], "gaussian-threshold");
  EXPECT_EQ(report["queries"][1]["kind"], "gnmax-data-dependent");
  EXPECT_EQ(report["queries"][2]["kind"], "laplace");
  EXPECT_TRUE(report["queries"][0]["lambda"].is_null());
  EXPECT_DOUBLE_EQ(report["queries"][1]["lambda"].get<double>(), 20.0);
}

}  // namespace
}  // namespace dpsynth
