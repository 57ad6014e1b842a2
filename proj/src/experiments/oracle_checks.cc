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

#include "fedsv/experiments/oracle_checks.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsv/common/seeding.h"
#include "fedsv/valuation/exact.h"
#include "fedsv/valuation/synthetic_games.h"

namespace fedsv::experiments {
namespace {

// Ids of the history block sit above every round player.
constexpr ParticipantId kHistoryBase = 1000;

Coalition Players(int m) {
  std::vector<ParticipantId> ids(m);
  std::iota(ids.begin(), ids.end(), 0);
  return Coalition(std::move(ids));
}

template <typename Estimate>
ContractResult RunContract(const std::string& name, int players,
                           const estimators::ApproxParams& params, int trials,
                           std::uint64_t seed, Estimate estimate) {
  params.Validate();
  ContractResult out;
  out.estimator = name;
  out.players = players;
  out.trials = trials;
  out.required_rate = 1.0 - params.delta;
  const Coalition round = Players(players);
  for (int trial = 0; trial < trials; ++trial) {
    const HashedRandomGame game(DeriveSeed(seed, "game", trial),
                                params.range_bound);
    const CoalitionSequence history{{Coalition{kHistoryBase, kHistoryBase + 1}}};
    const ValueVector exact =
        ExactFederatedRoundShapley(game, history, round, {});
    estimators::EstimatorDiagnostics diag;
    const ValueVector approx =
        estimate(game, history, round, DeriveSeed(seed, "estimate", trial), &diag);
    out.samples = diag.utility_evaluations;
    double worst = 0.0;
    for (const ParticipantId id : round) {
      worst = std::max(worst, std::abs(approx.Get(id) - exact.Get(id)));
    }
    out.worst_error = std::max(out.worst_error, worst);
    if (worst <= params.epsilon) ++out.successes;
    const double gain = game.Evaluate(history.Then(round)) -
                        game.Evaluate(history.Then(Coalition{}));
    out.worst_efficiency_residual =
        std::max(out.worst_efficiency_residual, std::abs(approx.Sum() - gain));
  }
  return out;
}

}  // namespace

ContractResult CheckPermutationContract(int players,
                                        const estimators::ApproxParams& params,
                                        int trials, std::uint64_t seed,
                                        int threads) {
  const std::int64_t count =
      estimators::PermutationSampleCount(params, players);
  estimators::EstimatorOptions options;
  options.threads = threads;
  return RunContract(
      "perm", players, params, trials, seed,
      [&](const UtilityOracle& game, const CoalitionSequence& history,
          const Coalition& round, std::uint64_t s,
          estimators::EstimatorDiagnostics* diag) {
        return estimators::PermutationSamplingRound(game, history, round, count,
                                                    s, options, diag);
      });
}

ContractResult CheckGroupTestingContract(int players,
                                         const estimators::ApproxParams& params,
                                         int trials, std::uint64_t seed,
                                         int threads) {
  const estimators::GroupTestingPlan plan =
      estimators::MakeGroupTestingPlan(players, params);
  estimators::EstimatorOptions options;
  options.threads = threads;
  return RunContract(
      "gt", players, params, trials, seed,
      [&](const UtilityOracle& game, const CoalitionSequence& history,
          const Coalition& round, std::uint64_t s,
          estimators::EstimatorDiagnostics* diag) {
        return estimators::GroupTestingRound(game, history, round, plan, s,
                                             options, diag);
      });
}

double FormEquivalenceGap(int games, int max_players, std::uint64_t seed) {
  double gap = 0.0;
  for (int g = 0; g < games; ++g) {
    const int n = 1 + g % max_players;
    const HashedRandomGame game(DeriveSeed(seed, "form-game", g));
    const Coalition players = Players(n);
    const ValueVector subset = ExactShapley(game, players);
    const ValueVector perm = ExactShapleyPermutationForm(game, players);
    for (const ParticipantId id : players) {
      gap = std::max(gap, std::abs(subset.Get(id) - perm.Get(id)));
    }
  }
  return gap;
}

}  // namespace fedsv::experiments
