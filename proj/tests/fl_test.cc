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
#include <filesystem>
#include <fstream>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"
#include "fedsv/data/dataset.h"
#include "fedsv/data/partition.h"
#include "fedsv/fl/federated.h"
#include "fedsv/fl/model.h"
#include "fedsv/fl/training.h"
#include "fedsv/valuation/exact.h"
#include "gtest/gtest.h"

namespace fedsv::fl {
namespace {

data::Dataset Blobs(std::size_t n, std::uint64_t seed, double separation = 3.0) {
  data::BlobSpec spec;
  spec.n = n;
  spec.dim = 4;
  spec.class_count = 3;
  spec.separation = separation;
  spec.seed = seed;
  return data::SynthBlobs(spec);
}

ModelLayout Layout(ModelKind kind) {
  return ModelLayout{kind, 4, 3, kind == ModelKind::kMlp ? 5 : 0};
}

ModelParams RandomParams(const ModelLayout& layout, std::uint64_t seed) {
  ModelParams p{layout, std::vector<double>(layout.ParameterCount())};
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  for (double& x : p.theta) x = n(rng);
  return p;
}

double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

class GradientTest : public ::testing::TestWithParam<ModelKind> {};

TEST_P(GradientTest, MatchesCentralDifferences) {
  const data::Dataset ds = Blobs(50, 1);
  for (int draw = 0; draw < 20; ++draw) {
    ModelParams p = RandomParams(Layout(GetParam()), DeriveSeed(3, "grad", draw));
    const std::vector<std::size_t> rows{std::size_t(draw), std::size_t(draw + 7)};
    std::vector<double> grad;
    LossAndGradient(p, ds, rows, &grad);
    for (std::size_t i = 0; i < p.theta.size(); ++i) {
      const double x = p.theta[i];
      p.theta[i] = x + 1e-5;
      const double up = LossAndGradient(p, ds, rows, nullptr);
      p.theta[i] = x - 1e-5;
      const double down = LossAndGradient(p, ds, rows, nullptr);
      p.theta[i] = x;
      const double fd = (up - down) / 2e-5;
      EXPECT_LE(RelativeError(grad[i], fd), 1e-4) << "param " << i;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Models, GradientTest,
                         ::testing::Values(ModelKind::kLogistic, ModelKind::kMlp),
                         [](const ::testing::TestParamInfo<ModelKind>& info) {
                           return ToString(info.param);
                         });

TEST(ModelTest, LossIsCrossEntropy) {
  const data::Dataset ds = Blobs(10, 2);
  const ModelParams p = RandomParams(Layout(ModelKind::kLogistic), 4);
  const std::vector<std::size_t> rows{3};
  std::vector<double> z(3);
  Logits(p, ds.row(3), z);
  const double lse = std::log(std::exp(z[0]) + std::exp(z[1]) + std::exp(z[2]));
  EXPECT_NEAR(LossAndGradient(p, ds, rows, nullptr), lse - z[ds.labels[3]], 1e-12);
}

TEST(TrainingTest, ZeroLearningRateKeepsGlobal) {
  const data::Dataset ds = Blobs(20, 3);
  const ModelParams global = InitModel(Layout(ModelKind::kLogistic), 1);
  TrainingConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_EQ(RunParticipantUpdate(global, ds, cfg, 0, 0, 5).updated_params, global);
}

TEST(TrainingTest, OneSampleStepIsGradientStep) {
  const data::Dataset ds = Blobs(10, 3).Slice(0, 1);
  const ModelParams global = RandomParams(Layout(ModelKind::kLogistic), 9);
  TrainingConfig cfg;
  cfg.learning_rate = 0.3;
  cfg.batch_size = 1;
  const std::vector<std::size_t> rows{0};
  std::vector<double> grad;
  LossAndGradient(global, ds, rows, &grad);
  const ModelParams after = RunParticipantUpdate(global, ds, cfg, 0, 0, 5).updated_params;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    EXPECT_NEAR(after.theta[i], global.theta[i] - 0.3 * grad[i], 1e-15);
  }
}

TEST(TrainingTest, DeterministicAndRejectsEmptyShard) {
  const data::Dataset ds = Blobs(40, 3);
  const ModelParams global = InitModel(Layout(ModelKind::kMlp), 1);
  TrainingConfig cfg;
  cfg.local_epochs = 3;
  EXPECT_EQ(RunParticipantUpdate(global, ds, cfg, 1, 0, 5),
            RunParticipantUpdate(global, ds, cfg, 1, 0, 5));
  EXPECT_THROW(RunParticipantUpdate(global, data::Dataset{4, 3, {}, {}}, cfg, 1, 0, 5),
               TrainingError);
}

TEST(TrainingTest, ConfigBounds) {
  TrainingConfig cfg;
  cfg.participant_fraction = 1.2;
  EXPECT_THROW(cfg.Validate(), ParameterError);
  cfg.participant_fraction = 0.3;
  EXPECT_EQ(cfg.ParticipantsPerRound(10), 3);
  cfg.participant_fraction = 0.01;
  EXPECT_EQ(cfg.ParticipantsPerRound(10), 1);
}

RoundRecord TwoParameterRound() {
  const ModelLayout layout{ModelKind::kLogistic, 1, 1, 0};
  RoundRecord r;
  r.global_before = ModelParams{layout, {0.0, 0.0}};
  r.selected = Coalition{2, 5};
  r.updates = {ParticipantUpdate{2, 0, ModelParams{layout, {1.0, 0.0}}},
               ParticipantUpdate{5, 0, ModelParams{layout, {0.0, 1.0}}}};
  r.global_after = ModelParams{layout, {0.5, 0.5}};
  return r;
}

TEST(AggregateTest, MeanOfSubset) {
  const RoundRecord r = TwoParameterRound();
  EXPECT_EQ(AggregateSubset(r, Coalition{2, 5}).theta, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(AggregateSubset(r, Coalition{5}), r.updates[1].updated_params);
  EXPECT_EQ(AggregateSubset(r, Coalition{}), r.global_before);
  EXPECT_THROW(AggregateSubset(r, Coalition{3}), ParameterError);
}

TEST(UtilityTest, AccuracyCountsCorrectPredictions) {
  const data::Dataset ds = Blobs(90, 4);
  const ModelParams p = RandomParams(Layout(ModelKind::kLogistic), 12);
  int correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<double> z(3);
    Logits(p, ds.row(i), z);
    const int arg = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    correct += arg == ds.labels[i];
  }
  EXPECT_DOUBLE_EQ(EvaluateUtility(p, ds, Metric::kAccuracy), correct / 90.0);
}

TEST(UtilityTest, ConstantPredictorOnBalancedTwoClasses) {
  data::Dataset ds{1, 2, {0.1, 0.2, 0.3, 0.4}, {0, 1, 0, 1}};
  // W = 0, b favours class 1.
  const ModelParams p{ModelLayout{ModelKind::kLogistic, 1, 2, 0}, {0.0, 0.0, 0.0, 1.0}};
  EXPECT_DOUBLE_EQ(EvaluateUtility(p, ds, Metric::kAccuracy), 0.5);
  const double nl = EvaluateUtility(p, ds, Metric::kNegLoss);
  EXPECT_GT(nl, 0.0);
  EXPECT_LE(nl, 1.0);
}

struct SmallRun {
  data::Dataset train, validation;
  data::PartitionPlan plan;
  TrainingConfig cfg;
};

SmallRun MakeRun(int n, double fraction, int rounds) {
  SmallRun r;
  const data::Dataset pool = Blobs(700, 21, 2.0);
  r.train = pool.Slice(0, 400);
  r.validation = pool.Slice(400, 700);
  r.plan = data::PartitionIid(r.train, n, 8);
  r.cfg.rounds = rounds;
  r.cfg.participant_fraction = fraction;
  r.cfg.seed = 77;
  return r;
}

TEST(RoundOracleTest, ComposesAggregateAndUtility) {
  const SmallRun run = MakeRun(6, 0.5, 2);
  ValuationSettings none;
  none.method = ValuationMethod::kNone;
  const TrainingResult res =
      RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, none);
  const RoundOracle oracle(res.rounds, run.validation, Metric::kAccuracy);
  const RoundRecord& r1 = res.rounds[1];
  const CoalitionSequence history = oracle.History(1);
  const std::vector<ParticipantId> ids(r1.selected.begin(), r1.selected.end());
  for (unsigned mask = 0; mask < (1u << ids.size()); ++mask) {
    const Coalition s = r1.selected.SubsetFromMask(mask);
    EXPECT_EQ(oracle.Evaluate(history.Then(s)),
              EvaluateUtility(AggregateSubset(r1, s), run.validation, Metric::kAccuracy));
  }
  EXPECT_EQ(oracle.Evaluate(history.Then(r1.selected)),
            EvaluateUtility(r1.global_after, run.validation, Metric::kAccuracy));
  EXPECT_EQ(oracle.Evaluate(history.Then(Coalition{})),
            EvaluateUtility(r1.global_before, run.validation, Metric::kAccuracy));
  const Coalition other = res.rounds[0].selected.size() > 1
                              ? res.rounds[0].selected.Without(*res.rounds[0].selected.begin())
                              : Coalition{};
  EXPECT_THROW(oracle.Evaluate(CoalitionSequence{{other}}.Then(r1.selected)), OracleError);
}

TEST(FederatedTest, ValuationDoesNotChangeTraining) {
  const SmallRun run = MakeRun(6, 0.5, 3);
  ValuationSettings none, exact;
  none.method = ValuationMethod::kNone;
  const TrainingResult a = RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, none);
  const TrainingResult b = RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, exact);
  EXPECT_EQ(a.final_model, b.final_model);
  EXPECT_EQ(a.rounds, b.rounds);
}

TEST(FederatedTest, SingleRoundMatchesExactValue) {
  const SmallRun run = MakeRun(4, 1.0, 1);
  ValuationSettings exact;
  const TrainingResult res = RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, exact);
  const RoundOracle oracle(res.rounds, run.validation, Metric::kAccuracy);
  const ValueVector direct = ExactFederatedRoundShapley(oracle, {}, res.rounds[0].selected);
  for (int id = 0; id < 4; ++id) EXPECT_EQ(res.report.total.Get(id), direct.Get(id));
}

TEST(FederatedTest, TotalsTelescope) {
  const SmallRun run = MakeRun(10, 0.3, 3);
  for (const auto method : {ValuationMethod::kExact, ValuationMethod::kPermutation}) {
    ValuationSettings s;
    s.method = method;
    s.approx.epsilon = 0.3;
    const TrainingResult res = RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, s);
    const double u0 = EvaluateUtility(res.rounds.front().global_before, run.validation, Metric::kAccuracy);
    const double ut = EvaluateUtility(res.final_model, run.validation, Metric::kAccuracy);
    EXPECT_NEAR(res.report.total.Sum(), ut - u0, 1e-9);
    EXPECT_EQ(res.report.total.values.size(), 10u);
  }
}

TEST(FederatedTest, ValueRoundsReproducesOnlineReport) {
  const SmallRun run = MakeRun(8, 0.5, 3);
  for (const auto method : {ValuationMethod::kExact, ValuationMethod::kPermutation,
                            ValuationMethod::kGroupTesting, ValuationMethod::kLoo,
                            ValuationMethod::kRandom}) {
    ValuationSettings s;
    s.method = method;
    s.approx.epsilon = 0.4;
    s.approx.delta = 0.4;
    s.seed = 13;
    const TrainingResult res = RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, s);
    EXPECT_EQ(ValueRounds(res.rounds, run.validation, Metric::kAccuracy, s, 8), res.report)
        << ToString(method);
  }
}

TEST(FederatedTest, ReplayKeepingEveryoneIsIdentical) {
  const SmallRun run = MakeRun(6, 0.5, 3);
  ValuationSettings none;
  none.method = ValuationMethod::kNone;
  const TrainingResult res = RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, none);
  std::vector<Coalition> selections;
  for (const auto& r : res.rounds) selections.push_back(r.selected);
  EXPECT_EQ(ReplayTraining(run.train, run.plan, run.cfg, selections,
                           [](int, const Coalition& s) { return s; }),
            res.final_model);
  EXPECT_NE(ReplayTraining(run.train, run.plan, run.cfg, selections,
                           [](int, const Coalition& s) { return Coalition{*s.begin()}; }),
            res.final_model);
}

TEST(SnapshotTest, RoundTripAndCorruption) {
  const SmallRun run = MakeRun(4, 0.5, 2);
  ValuationSettings none;
  none.method = ValuationMethod::kNone;
  const TrainingResult res = RunFederatedTraining(run.train, run.plan, run.validation, run.cfg, none);
  const auto dir = std::filesystem::temp_directory_path() / "fedsv_snapshot_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const auto& r : res.rounds) {
    WriteRoundSnapshot(r, (dir / RoundSnapshotName(r.round_index)).string());
  }
  EXPECT_EQ(LoadRoundSnapshots(dir.string()), res.rounds);

  const auto path = (dir / RoundSnapshotName(0)).string();
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  EXPECT_THROW(ReadRoundSnapshot(path), FormatError);
  EXPECT_THROW(LoadRoundSnapshots((dir / "missing").string()), FormatError);
}

}  // namespace
}  // namespace fedsv::fl
