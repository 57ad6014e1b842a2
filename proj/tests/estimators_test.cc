/*
 * Copyright 2026 The FedSV Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <numeric>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"
#include "fedsv/estimators/estimators.h"
#include "fedsv/valuation/exact.h"
#include "fedsv/valuation/synthetic_games.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedsv::estimators {
namespace {

using fedsv::testing::Range;
using fedsv::testing::SetGame;

ApproxParams Params(double eps, double delta, double r = 1.0) {
  ApproxParams p;
  p.epsilon = eps;
  p.delta = delta;
  p.range_bound = r;
  return p;
}

TEST(SampleCountTest, HandComputedValues) {
  // ceil(200 ln 400) = ceil(1198.29...).
  EXPECT_EQ(PermutationSampleCount(Params(0.1, 0.05), 10), 1199);
  EXPECT_EQ(PermutationSampleCount(Params(std::sqrt(2.0), 2.0 / std::exp(1.0)), 1), 1);
}

TEST(SampleCountTest, QuadraticInRange) {
  for (int m : {2, 5, 17}) {
    const auto base = PermutationSampleCount(Params(0.1, 0.1, 1.0), m);
    const auto doubled = PermutationSampleCount(Params(0.1, 0.1, 2.0), m);
    EXPECT_LE(std::abs(doubled - 4 * base), 4);
  }
}

TEST(SampleCountTest, RejectsBadParams) {
  EXPECT_THROW(PermutationSampleCount(Params(0.0, 0.1), 3), ParameterError);
  EXPECT_THROW(PermutationSampleCount(Params(0.1, 1.0), 3), ParameterError);
  EXPECT_THROW(PermutationSampleCount(Params(0.1, 0.1, -1.0), 3), ParameterError);
}

TEST(HBernsteinTest, Values) {
  EXPECT_EQ(HBernstein(0.0), 0.0);
  EXPECT_NEAR(HBernstein(1.0), 2.0 * std::log(2.0) - 1.0, 1e-12);
  EXPECT_NEAR(HBernstein(std::exp(1.0) - 1.0), 1.0, 1e-12);
  EXPECT_THROW(HBernstein(-1.0), ParameterError);
}

TEST(GroupTestingPlanTest, FourPlayers) {
  const GroupTestingPlan plan = MakeGroupTestingPlan(4, Params(0.1, 0.1));
  EXPECT_NEAR(plan.z, 11.0 / 3.0, 1e-12);
  ASSERT_EQ(plan.q.size(), 3u);
  EXPECT_NEAR(plan.q[0], 4.0 / 11.0, 1e-12);
  EXPECT_NEAR(plan.q[1], 3.0 / 11.0, 1e-12);
  EXPECT_NEAR(plan.q[2], 4.0 / 11.0, 1e-12);
  EXPECT_NEAR(plan.q_tot, 5.0 / 11.0, 1e-12);
  EXPECT_GE(plan.t1, 1);
  EXPECT_GE(plan.t2, 1);
}

TEST(GroupTestingPlanTest, TwoPlayers) {
  const GroupTestingPlan plan = MakeGroupTestingPlan(2, Params(0.1, 0.1));
  EXPECT_NEAR(plan.z, 2.0, 1e-12);
  ASSERT_EQ(plan.q.size(), 1u);
  EXPECT_NEAR(plan.q[0], 1.0, 1e-12);
  EXPECT_NEAR(plan.q_tot, 0.0, 1e-12);
  EXPECT_THROW(MakeGroupTestingPlan(1, Params(0.1, 0.1)), ParameterError);
}

TEST(GroupTestingPlanTest, SizeDistributionIsSymmetricAndNormalized) {
  for (int m : {3, 6, 11, 40}) {
    const GroupTestingPlan plan = MakeGroupTestingPlan(m, Params(0.1, 0.1));
    EXPECT_NEAR(std::accumulate(plan.q.begin(), plan.q.end(), 0.0), 1.0, 1e-12);
    for (int k = 1; k < m; ++k) EXPECT_NEAR(plan.q[k - 1], plan.q[m - k - 1], 1e-15);
  }
}

TEST(GroupTestingPlanTest, TestCountsFromHandValues) {
  // m = 4 with Z = 11/3, q_tot = 5/11, C_eps = C_delta = 2.
  const ApproxParams p = Params(0.1, 0.1);
  const GroupTestingPlan plan = MakeGroupTestingPlan(4, p);
  const double z = 11.0 / 3.0, q_tot = 5.0 / 11.0;
  const double spread = 1.0 - q_tot * q_tot;
  const double u = 2.0 * 0.1 / (z * 1.0 * 2.0 * spread);
  const double h = (1.0 + u) * std::log(1.0 + u) - u;
  const double t1 = 4.0 / (spread * h) * std::log(2.0 * 3.0 / (2.0 * 0.1));
  const double t2 = 4.0 * 4.0 / (1.0 * 0.01) * std::log(2.0 * 2.0 / (1.0 * 0.1));
  EXPECT_EQ(plan.t1, static_cast<std::int64_t>(std::ceil(t1)));
  EXPECT_EQ(plan.t2, static_cast<std::int64_t>(std::ceil(t2)));
}

TEST(GroupTestingPlanTest, GroupTestingWinsAtLargeM) {
  const ApproxParams p = Params(0.1, 0.1);
  const GroupTestingPlan plan = MakeGroupTestingPlan(500, p);
  EXPECT_LT(plan.t1 + plan.t2, 500 * PermutationSampleCount(p, 500));
}

TEST(PermutationSamplingTest, SinglePlayerIsExactGain) {
  const HashedRandomGame game(4);
  const CoalitionSequence history{{Coalition{8}}};
  const ValueVector v = PermutationSamplingRound(game, history, Coalition{2}, 5, 1);
  EXPECT_DOUBLE_EQ(v.Get(2), game.Evaluate(history.Then(Coalition{2})) -
                                 game.Evaluate(history.Then(Coalition{})));
}

TEST(PermutationSamplingTest, ConstantOracleGivesZero) {
  const FunctionOracle game([](const CoalitionSequence&) { return 0.4; }, 1.0);
  const ValueVector v = PermutationSamplingRound(game, {}, Range(5), 50, 3);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(v.Get(i), 0.0);
}

TEST(PermutationSamplingTest, EveryRunTelescopes) {
  for (int s = 0; s < 20; ++s) {
    const HashedRandomGame game(DeriveSeed(2, "tele", s));
    const CoalitionSequence history{{Coalition{40, 41}}};
    const Coalition players = Range(2 + s % 5);
    const ValueVector v = PermutationSamplingRound(game, history, players, 1 + s, s);
    EXPECT_NEAR(v.Sum(),
                game.Evaluate(history.Then(players)) -
                    game.Evaluate(history.Then(Coalition{})),
                1e-9);
  }
}

TEST(PermutationSamplingTest, SingleSampleDrawsAreUnbiased) {
  const HashedRandomGame game(17);
  const Coalition players = Range(4);
  const ValueVector exact = ExactFederatedRoundShapley(game, {}, players);
  constexpr int kDraws = 10000;
  std::vector<double> sum(4, 0.0), sq(4, 0.0);
  for (int d = 0; d < kDraws; ++d) {
    const ValueVector v = PermutationSamplingRound(game, {}, players, 1,
                                                   DeriveSeed(5, "draw", d));
    for (int i = 0; i < 4; ++i) {
      sum[i] += v.Get(i);
      sq[i] += v.Get(i) * v.Get(i);
    }
  }
  for (int i = 0; i < 4; ++i) {
    const double mean = sum[i] / kDraws;
    const double var = sq[i] / kDraws - mean * mean;
    const double se = std::sqrt(var / kDraws);
    EXPECT_LE(std::abs(mean - exact.Get(i)), 3.0 * se + 1e-12) << "player " << i;
  }
}

TEST(PermutationSamplingTest, DeterministicAcrossThreadCounts) {
  const HashedRandomGame game(23);
  EstimatorOptions one, four;
  four.threads = 4;
  EXPECT_EQ(PermutationSamplingRound(game, {}, Range(6), 9000, 7, one),
            PermutationSamplingRound(game, {}, Range(6), 9000, 7, four));
}

TEST(PermutationSamplingTest, OracleFailureNamesProgress) {
  // Valid until a second participant joins.
  const FunctionOracle game(
      [](const CoalitionSequence& seq) {
        return seq.blocks.empty() || seq.blocks.back().size() < 2 ? 0.5 : 5.0;
      },
      1.0);
  try {
    PermutationSamplingRound(game, {}, Range(3), 10, 1);
    FAIL() << "expected OracleError";
  } catch (const OracleError& e) {
    EXPECT_NE(std::string(e.what()).find("of 10"), std::string::npos);
  }
}

TEST(GroupTestingTest, ConstantOracleConcentratesAtZero) {
  const FunctionOracle game([](const CoalitionSequence&) { return 0.3; }, 1.0);
  const GroupTestingPlan plan = MakeGroupTestingPlan(4, Params(0.2, 0.2));
  const ValueVector v = GroupTestingRound(game, {}, Range(4), plan, 5);
  // Every pivot marginal is exactly zero; the differences only concentrate.
  EXPECT_EQ(v.Get(3), 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(v.Get(i), 0.0, 0.2);
}

TEST(GroupTestingTest, ZeroDifferencesCopyPivot) {
  const AdditiveGame game({{0, 0.1}, {1, 0.1}, {2, 0.1}}, 1.0);
  const GroupTestingPlan plan = MakeGroupTestingPlan(3, Params(0.2, 0.2));
  const ValueVector v = DiffToSv(DifferenceMatrix(3), game, {}, Range(3), plan, 9);
  EXPECT_EQ(v.Get(0), v.Get(2));
  EXPECT_EQ(v.Get(1), v.Get(2));
}

TEST(GroupTestingTest, DifferencesAreConsistent) {
  const HashedRandomGame game(31);
  const GroupTestingPlan plan = MakeGroupTestingPlan(5, Params(0.3, 0.3));
  const TestMatrix tests = RunGroupTests(game, {}, Range(5), plan, 4);
  EXPECT_EQ(tests.tests(), plan.t1);
  const DifferenceMatrix c = EstimateDifferences(tests, plan);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(c(i, i), 0.0);
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR(c(i, j), -c(j, i), 1e-12);
      for (int k = 0; k < 5; ++k) EXPECT_NEAR(c(i, j) + c(j, k), c(i, k), 1e-12);
    }
  }
}

TEST(GroupTestingTest, TestSizesFollowPlan) {
  const HashedRandomGame game(3);
  const GroupTestingPlan plan = MakeGroupTestingPlan(4, Params(0.1, 0.1));
  const TestMatrix tests = RunGroupTests(game, {}, Range(4), plan, 12);
  std::vector<double> freq(3, 0.0);
  for (std::int64_t t = 0; t < tests.tests(); ++t) {
    int k = 0;
    for (int i = 0; i < 4; ++i) k += tests.member(t, i);
    ASSERT_GE(k, 1);
    ASSERT_LE(k, 3);
    freq[k - 1] += 1.0 / tests.tests();
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(freq[k], plan.q[k], 0.01);
}

TEST(GroupTestingTest, PivotWithinEpsilonOnAdditiveGame) {
  const std::map<ParticipantId, double> w{{0, 0.1}, {1, 0.3}, {2, 0.05}, {3, 0.2}, {4, 0.25}};
  const AdditiveGame game(w, 1.0);
  const ApproxParams p = Params(0.1, 0.2);
  const GroupTestingPlan plan = MakeGroupTestingPlan(5, p);
  int ok = 0;
  constexpr int kTrials = 50;
  for (int s = 0; s < kTrials; ++s) {
    const ValueVector v =
        DiffToSv(DifferenceMatrix(5), game, {}, Range(5), plan, DeriveSeed(1, "pivot-trial", s));
    if (std::abs(v.Get(4) - w.at(4)) <= p.epsilon) ++ok;
  }
  EXPECT_GE(ok, static_cast<int>((1.0 - p.delta) * kTrials));
}

TEST(GroupTestingTest, InterchangeablePlayersStayClose) {
  const auto game = fedsv::testing::SetGame(
      [](const Coalition& s) {
        return 0.3 * (s.Contains(0) + s.Contains(1)) + 0.2 * s.Contains(2) +
               0.1 * (s.Contains(0) && s.Contains(1));
      },
      1.0);
  const ApproxParams p = Params(0.2, 0.2);
  const GroupTestingPlan plan = MakeGroupTestingPlan(3, p);
  int ok = 0;
  for (int s = 0; s < 100; ++s) {
    const ValueVector v = GroupTestingRound(game, {}, Range(3), plan, DeriveSeed(8, "sym", s));
    ok += std::abs(v.Get(0) - v.Get(1)) <= 2 * p.epsilon;
  }
  EXPECT_GE(ok, 80);
}

TEST(TradeoffTest, PicksSmallestTotal) {
  const std::vector<double> grid{0.5, 1.5, 2.0, 3.0, 5.0};
  const TradeoffChoice c = OptimizeTradeoff(10, Params(0.1, 0.1), grid);
  for (double ce : grid) {
    for (double cd : grid) {
      if (ce <= 1 || cd <= 1) continue;
      ApproxParams p = Params(0.1, 0.1);
      p.c_eps = ce;
      p.c_delta = cd;
      try {
        const GroupTestingPlan plan = MakeGroupTestingPlan(10, p);
        EXPECT_LE(c.total_evaluations, plan.t1 + plan.t2);
      } catch (const ParameterError&) {
      }
    }
  }
}

}  // namespace
}  // namespace fedsv::estimators
