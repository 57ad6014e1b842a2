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

#ifndef FEDSV_FL_FEDERATED_H_
#define FEDSV_FL_FEDERATED_H_

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <map>
#include <utility>
#include <vector>

#include "fedsv/data/dataset.h"
#include "fedsv/data/partition.h"
#include "fedsv/estimators/estimators.h"
#include "fedsv/fl/training.h"
#include "fedsv/valuation/game.h"
#include "fedsv/valuation/value_vector.h"

namespace fedsv::fl {

// Utility oracle over recorded rounds. A sequence I_1 + ... + I_{t-1} + S is
// worth EvaluateUtility(AggregateSubset(round_t, S)); the prefix must be the
// realized selection history, since nothing else can be evaluated without
// retraining. Results are memoized; Evaluate is safe to call concurrently.
//
// The oracle keeps a reference to `rounds`; rounds may be appended while the
// oracle is alive but existing records must not change.
class RoundOracle : public UtilityOracle {
 public:
  RoundOracle(const std::vector<RoundRecord>& rounds,
              const data::Dataset& validation, Metric metric);

  double Evaluate(const CoalitionSequence& sequence) const override;
  double range_bound() const override { return 1.0; }

  // Realized history I_{1:t} for the first t rounds.
  CoalitionSequence History(int t) const;

 private:
  const std::vector<RoundRecord>& rounds_;
  const data::Dataset& validation_;
  Metric metric_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::size_t, std::uint64_t>, double> cache_;
};

enum class ValuationMethod {
  kNone,
  kExact,
  kPermutation,
  kGroupTesting,
  kLoo,
  kRandom,
};

std::string ToString(ValuationMethod method);
ValuationMethod ValuationMethodFromString(const std::string& s);

struct ValuationSettings {
  ValuationMethod method = ValuationMethod::kExact;
  estimators::ApproxParams approx;
  int enumeration_cap = 20;
  int threads = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const ValuationSettings&,
                         const ValuationSettings&) = default;
};

// Values of round t (0-based) of `rounds`. Permutation sampling and group
// testing draw from DeriveSeed(settings.seed, "estimator", t); the random
// baseline from DeriveSeed(settings.seed, "baseline", t). Group testing on a
// single-player round falls back to the exact value.
ValueVector ValueRound(const RoundOracle& oracle,
                       const std::vector<RoundRecord>& rounds, int t,
                       const ValuationSettings& settings,
                       estimators::EstimatorDiagnostics* diagnostics = nullptr);

// Values every recorded round and assembles the report over participants
// [0, participant_count).
ValuationReport ValueRounds(
    const std::vector<RoundRecord>& rounds, const data::Dataset& validation,
    Metric metric, const ValuationSettings& settings, int participant_count,
    std::vector<estimators::EstimatorDiagnostics>* diagnostics = nullptr);

struct TrainingResult {
  ModelParams final_model;
  ValuationReport report;
  std::vector<RoundRecord> rounds;
  std::vector<estimators::EstimatorDiagnostics> diagnostics;
};

struct TrainingHooks {
  // Called after each round is recorded, before it is valued.
  std::function<void(const RoundRecord&)> on_round;
  int threads = 1;
};

// Participants selected in round t: m = max(ceil(C * N), 1) ids drawn without
// replacement from DeriveSeed(cfg.seed, "selection", t).
Coalition SelectParticipants(const TrainingConfig& cfg, int participant_count,
                             int round);

std::uint64_t LocalSgdSeed(const TrainingConfig& cfg, int round,
                           ParticipantId id);

// Federated averaging over `partition` of `train`, valuing every round with
// `valuation` as soon as it is recorded. Valuation only reads the records, so
// the trained model does not depend on the valuation method.
TrainingResult RunFederatedTraining(const data::Dataset& train,
                                    const data::PartitionPlan& partition,
                                    const data::Dataset& validation,
                                    const TrainingConfig& cfg,
                                    const ValuationSettings& valuation,
                                    const TrainingHooks& hooks = {});

// Retrains along a fixed per-round selection. `keep(t, selected)` returns the
// subset whose updates are averaged in round t; local updates use the same
// seeds as the original run, so keeping everyone reproduces it exactly.
ModelParams ReplayTraining(
    const data::Dataset& train, const data::PartitionPlan& partition,
    const TrainingConfig& cfg, const std::vector<Coalition>& selections,
    const std::function<Coalition(int, const Coalition&)>& keep,
    int threads = 1);

// Binary round snapshots, one file per round.
void WriteRoundSnapshot(const RoundRecord& round, const std::string& path);
RoundRecord ReadRoundSnapshot(const std::string& path);
std::string RoundSnapshotName(int round);
// Reads round_0000.bin, round_0001.bin, ... until the first gap. Throws
// FormatError when the directory is missing or holds no rounds.
std::vector<RoundRecord> LoadRoundSnapshots(const std::string& directory);

}  // namespace fedsv::fl

#endif  // FEDSV_FL_FEDERATED_H_
