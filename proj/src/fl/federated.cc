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

#include "fedsv/fl/federated.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "fedsv/common/errors.h"
#include "fedsv/common/parallel.h"
#include "fedsv/common/seeding.h"
#include "fedsv/valuation/exact.h"

namespace fedsv::fl {

RoundOracle::RoundOracle(const std::vector<RoundRecord>& rounds,
                         const data::Dataset& validation, Metric metric)
    : rounds_(rounds), validation_(validation), metric_(metric) {}

CoalitionSequence RoundOracle::History(int t) const {
  CoalitionSequence h;
  for (int i = 0; i < t; ++i) h.blocks.push_back(rounds_.at(i).selected);
  return h;
}

double RoundOracle::Evaluate(const CoalitionSequence& sequence) const {
  if (rounds_.empty()) throw OracleError("no rounds have been recorded");
  // The empty sequence is the initial model, i.e. round 1 with S = {}.
  const std::size_t t = std::max<std::size_t>(sequence.size(), 1);
  if (t > rounds_.size()) {
    throw OracleError("sequence has " + std::to_string(t) +
                      " blocks but only " + std::to_string(rounds_.size()) +
                      " rounds are recorded");
  }
  for (std::size_t b = 0; b + 1 < sequence.size(); ++b) {
    if (!(sequence.blocks[b] == rounds_[b].selected)) {
      throw OracleError("only realized histories are evaluable: block " +
                        std::to_string(b) + " of " + sequence.ToString() +
                        " differs from the recorded selection");
    }
  }
  const RoundRecord& round = rounds_[t - 1];
  const Coalition subset =
      sequence.empty() ? Coalition{} : sequence.blocks.back();

  std::uint64_t mask = 0;
  const auto& ids = round.selected.ids();
  for (const ParticipantId id : subset) {
    const auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) {
      throw OracleError("participant " + std::to_string(id) +
                        " was not selected in round " +
                        std::to_string(round.round_index));
    }
    mask |= std::uint64_t{1} << (it - ids.begin());
  }
  const bool cacheable = ids.size() <= 64;
  const auto key = std::make_pair(t, mask);
  if (cacheable) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double u =
      EvaluateUtility(AggregateSubset(round, subset), validation_, metric_);
  if (cacheable) {
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, u);
  }
  return u;
}

std::string ToString(ValuationMethod method) {
  switch (method) {
    case ValuationMethod::kNone:
      return "none";
    case ValuationMethod::kExact:
      return "exact";
    case ValuationMethod::kPermutation:
      return "perm";
    case ValuationMethod::kGroupTesting:
      return "gt";
    case ValuationMethod::kLoo:
      return "loo";
    case ValuationMethod::kRandom:
      return "random";
  }
  return "none";
}

ValuationMethod ValuationMethodFromString(const std::string& s) {
  for (const auto m :
       {ValuationMethod::kNone, ValuationMethod::kExact,
        ValuationMethod::kPermutation, ValuationMethod::kGroupTesting,
        ValuationMethod::kLoo, ValuationMethod::kRandom}) {
    if (ToString(m) == s) return m;
  }
  throw ParameterError("unknown valuation method '" + s + "'");
}

ValueVector ValueRound(const RoundOracle& oracle,
                       const std::vector<RoundRecord>& rounds, int t,
                       const ValuationSettings& settings,
                       estimators::EstimatorDiagnostics* diagnostics) {
  const CoalitionSequence history = oracle.History(t);
  const Coalition& players = rounds.at(t).selected;
  const int m = static_cast<int>(players.size());
  const std::uint64_t estimator_seed =
      DeriveSeed(settings.seed, "estimator", static_cast<std::uint64_t>(t));
  const estimators::EstimatorOptions options{settings.threads};
  ValueVector out;
  switch (settings.method) {
    case ValuationMethod::kNone:
      break;
    case ValuationMethod::kExact:
      out = ExactFederatedRoundShapley(
          oracle, history, players,
          {settings.enumeration_cap, settings.threads});
      break;
    case ValuationMethod::kPermutation: {
      const auto samples =
          estimators::PermutationSampleCount(settings.approx, m);
      out = estimators::PermutationSamplingRound(oracle, history, players,
                                                 samples, estimator_seed,
                                                 options, diagnostics);
      break;
    }
    case ValuationMethod::kGroupTesting:
      if (m < 2) {
        out = ExactFederatedRoundShapley(oracle, history, players);
      } else {
        const auto plan = estimators::MakeGroupTestingPlan(m, settings.approx);
        out = estimators::GroupTestingRound(oracle, history, players, plan,
                                            estimator_seed, options,
                                            diagnostics);
      }
      break;
    case ValuationMethod::kLoo:
      out = FederatedLooRound(oracle, history, players);
      break;
    case ValuationMethod::kRandom: {
      Rng rng(DeriveSeed(settings.seed, "baseline",
                         static_cast<std::uint64_t>(t)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (const ParticipantId id : players) out.values[id] = unit(rng);
      break;
    }
  }
  out.round_index = t;
  return out;
}

namespace {

ValuationReport AssembleReport(const RoundOracle& oracle,
                               std::vector<ValueVector> per_round,
                               int participant_count) {
  ValuationReport report;
  const int rounds = static_cast<int>(per_round.size());
  std::vector<double> utility(rounds + 1);
  for (int t = 0; t <= rounds; ++t) {
    utility[t] = EvaluateChecked(oracle, oracle.History(t));
  }
  for (int t = 0; t < rounds; ++t) {
    per_round[t].FillUniverse(participant_count);
    report.per_round_utility_delta.push_back(utility[t + 1] - utility[t]);
  }
  report.per_round = std::move(per_round);
  report.initial_utility = utility.front();
  report.final_utility = utility.back();
  FinalizeReport(report);
  report.total.FillUniverse(participant_count);
  return report;
}

}  // namespace

ValuationReport ValueRounds(
    const std::vector<RoundRecord>& rounds, const data::Dataset& validation,
    Metric metric, const ValuationSettings& settings, int participant_count,
    std::vector<estimators::EstimatorDiagnostics>* diagnostics) {
  const RoundOracle oracle(rounds, validation, metric);
  std::vector<ValueVector> per_round;
  for (int t = 0; t < static_cast<int>(rounds.size()); ++t) {
    estimators::EstimatorDiagnostics diag;
    per_round.push_back(ValueRound(oracle, rounds, t, settings, &diag));
    if (diagnostics != nullptr) diagnostics->push_back(std::move(diag));
  }
  return AssembleReport(oracle, std::move(per_round), participant_count);
}

Coalition SelectParticipants(const TrainingConfig& cfg, int participant_count,
                             int round) {
  const int m = cfg.ParticipantsPerRound(participant_count);
  std::vector<ParticipantId> ids(participant_count);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(DeriveSeed(cfg.seed, "selection", static_cast<std::uint64_t>(round)));
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, participant_count - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(m);
  return Coalition(std::move(ids));
}

std::uint64_t LocalSgdSeed(const TrainingConfig& cfg, int round,
                           ParticipantId id) {
  return DeriveSeed(cfg.seed, "local-sgd", static_cast<std::uint64_t>(round),
                    static_cast<std::uint64_t>(id));
}

namespace {

ModelLayout LayoutFor(const data::Dataset& train, const TrainingConfig& cfg) {
  return {cfg.model, train.dim, train.class_count,
          cfg.model == ModelKind::kMlp ? cfg.hidden : 0};
}

std::vector<data::Dataset> Shards(const data::Dataset& train,
                                  const data::PartitionPlan& partition) {
  data::ValidatePartition(partition, train.size());
  std::vector<data::Dataset> shards;
  shards.reserve(partition.assignment.size());
  for (const auto& rows : partition.assignment) {
    shards.push_back(train.Subset(rows));
  }
  return shards;
}

RoundRecord TrainRound(const ModelParams& global,
                       const std::vector<data::Dataset>& shards,
                       const TrainingConfig& cfg, int t,
                       const Coalition& participants, int threads) {
  RoundRecord record;
  record.round_index = t;
  record.global_before = global;
  record.selected = participants;
  record.updates.resize(participants.size());
  ParallelFor(participants.size(), threads, [&](std::size_t i) {
    const ParticipantId id = participants.ids()[i];
    record.updates[i] = RunParticipantUpdate(global, shards.at(id), cfg, id, t,
                                             LocalSgdSeed(cfg, t, id));
  });
  record.global_after = AggregateSubset(record, participants);
  return record;
}

}  // namespace

TrainingResult RunFederatedTraining(const data::Dataset& train,
                                    const data::PartitionPlan& partition,
                                    const data::Dataset& validation,
                                    const TrainingConfig& cfg,
                                    const ValuationSettings& valuation,
                                    const TrainingHooks& hooks) {
  cfg.Validate();
  const std::vector<data::Dataset> shards = Shards(train, partition);
  const int n = partition.participant_count;

  TrainingResult result;
  ModelParams global = InitModel(LayoutFor(train, cfg), cfg.seed);
  const RoundOracle oracle(result.rounds, validation, cfg.metric);
  std::vector<ValueVector> per_round;
  for (int t = 0; t < cfg.rounds; ++t) {
    result.rounds.push_back(TrainRound(global, shards, cfg, t,
                                       SelectParticipants(cfg, n, t),
                                       hooks.threads));
    if (hooks.on_round) hooks.on_round(result.rounds.back());
    if (valuation.method != ValuationMethod::kNone) {
      estimators::EstimatorDiagnostics diag;
      per_round.push_back(
          ValueRound(oracle, result.rounds, t, valuation, &diag));
      result.diagnostics.push_back(std::move(diag));
    }
    global = result.rounds.back().global_after;
  }
  if (valuation.method != ValuationMethod::kNone) {
    result.report = AssembleReport(oracle, std::move(per_round), n);
  }
  result.final_model = std::move(global);
  return result;
}

ModelParams ReplayTraining(
    const data::Dataset& train, const data::PartitionPlan& partition,
    const TrainingConfig& cfg, const std::vector<Coalition>& selections,
    const std::function<Coalition(int, const Coalition&)>& keep,
    int threads) {
  cfg.Validate();
  const std::vector<data::Dataset> shards = Shards(train, partition);
  ModelParams global = InitModel(LayoutFor(train, cfg), cfg.seed);
  for (int t = 0; t < static_cast<int>(selections.size()); ++t) {
    const Coalition kept = keep(t, selections[t]);
    if (!kept.IsSubsetOf(selections[t])) {
      throw ParameterError("replay kept a participant that was not selected");
    }
    if (kept.empty()) continue;
    global = TrainRound(global, shards, cfg, t, kept, threads).global_after;
  }
  return global;
}

}  // namespace fedsv::fl
