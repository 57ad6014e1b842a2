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

#include "fedsv/valuation/exact.h"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>
#include <vector>

#include "fedsv/common/errors.h"
#include "fedsv/common/parallel.h"

namespace fedsv {
namespace {

void CheckCap(std::size_t players, int cap, const char* cost) {
  if (players > static_cast<std::size_t>(cap)) {
    throw EnumerationRefused(
        "exact enumeration over " + std::to_string(players) +
        " players refused: the total complexity is " + cost +
        " utility evaluations and the cap is " + std::to_string(cap));
  }
}

// Shapley weight 1 / (m * C(m-1, k)) for k = 0..m-1.
std::vector<double> SubsetWeights(std::size_t m) {
  std::vector<double> w(m);
  double binom = 1.0;  // C(m-1, k)
  for (std::size_t k = 0; k < m; ++k) {
    w[k] = 1.0 / (static_cast<double>(m) * binom);
    binom = binom * static_cast<double>(m - 1 - k) / static_cast<double>(k + 1);
  }
  return w;
}

}  // namespace

ValueVector ExactFederatedRoundShapley(const UtilityOracle& oracle,
                                       const CoalitionSequence& history,
                                       const Coalition& round_players,
                                       const ExactOptions& options) {
  const std::size_t m = round_players.size();
  CheckCap(m, options.enumeration_cap, "O(2^m)");
  ValueVector out;
  if (m == 0) return out;

  const std::size_t subsets = std::size_t{1} << m;
  std::vector<double> utility(subsets);
  ParallelFor(subsets, options.threads, [&](std::size_t mask) {
    utility[mask] = EvaluateChecked(
        oracle, history.Then(round_players.SubsetFromMask(mask)));
  });

  const std::vector<double> weight = SubsetWeights(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double s = 0.0;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit) continue;
      s += weight[std::popcount(mask)] * (utility[mask | bit] - utility[mask]);
    }
    out.values[round_players.ids()[i]] = s;
  }
  return out;
}

ValueVector ExactShapley(const UtilityOracle& oracle, const Coalition& players,
                         const ExactOptions& options) {
  return ExactFederatedRoundShapley(oracle, CoalitionSequence{}, players,
                                    options);
}

ValueVector ExactShapleyPermutationForm(const UtilityOracle& oracle,
                                        const Coalition& players,
                                        int enumeration_cap) {
  const std::size_t m = players.size();
  CheckCap(m, enumeration_cap, "O(N!)");
  ValueVector out;
  if (m == 0) return out;

  // Utilities are memoized by membership mask; each is still one oracle call.
  std::vector<double> cache(std::size_t{1} << m, -1.0);
  auto u = [&](unsigned long long mask) {
    double& slot = cache[mask];
    if (slot < 0.0) {
      slot = EvaluateChecked(
          oracle, CoalitionSequence{}.Then(players.SubsetFromMask(mask)));
    }
    return slot;
  };

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sums(m, 0.0);
  double permutations = 0.0;
  do {
    unsigned long long prefix = 0;
    double prev = u(prefix);
    for (const std::size_t p : order) {
      prefix |= 1ULL << p;
      const double cur = u(prefix);
      sums[p] += cur - prev;
      prev = cur;
    }
    permutations += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));

  for (std::size_t i = 0; i < m; ++i) {
    out.values[players.ids()[i]] = sums[i] / permutations;
  }
  return out;
}

ValueVector FederatedLooRound(const UtilityOracle& oracle,
                              const CoalitionSequence& history,
                              const Coalition& round_players) {
  ValueVector out;
  if (round_players.empty()) return out;
  const double full = EvaluateChecked(oracle, history.Then(round_players));
  for (const ParticipantId id : round_players) {
    out.values[id] =
        full - EvaluateChecked(oracle, history.Then(round_players.Without(id)));
  }
  return out;
}

}  // namespace fedsv
