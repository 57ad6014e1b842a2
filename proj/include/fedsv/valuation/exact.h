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

#ifndef FEDSV_VALUATION_EXACT_H_
#define FEDSV_VALUATION_EXACT_H_

#include "fedsv/valuation/game.h"
#include "fedsv/valuation/value_vector.h"

namespace fedsv {

inline constexpr int kSubsetEnumerationCap = 20;
inline constexpr int kPermutationEnumerationCap = 8;

struct ExactOptions {
  // Largest player count accepted; enumeration costs O(2^m) evaluations.
  int enumeration_cap = kSubsetEnumerationCap;
  // Workers used to evaluate the 2^m coalitions. Does not affect results.
  int threads = 1;
};

// Canonical Shapley value by subset enumeration with weights
// 1 / (N * C(N-1, |S|)). The oracle is queried with single-block sequences.
ValueVector ExactShapley(const UtilityOracle& oracle, const Coalition& players,
                         const ExactOptions& options = {});

// Same quantity averaged over all N! join orders. Capped at
// kPermutationEnumerationCap players.
ValueVector ExactShapleyPermutationForm(
    const UtilityOracle& oracle, const Coalition& players,
    int enumeration_cap = kPermutationEnumerationCap);

// Per-round federated Shapley value: the canonical value of the round's
// players, where coalition S is worth U(history + S).
ValueVector ExactFederatedRoundShapley(const UtilityOracle& oracle,
                                       const CoalitionSequence& history,
                                       const Coalition& round_players,
                                       const ExactOptions& options = {});

// loo_t(i) = U(history + I_t) - U(history + I_t \ {i}).
ValueVector FederatedLooRound(const UtilityOracle& oracle,
                              const CoalitionSequence& history,
                              const Coalition& round_players);

}  // namespace fedsv

#endif  // FEDSV_VALUATION_EXACT_H_
