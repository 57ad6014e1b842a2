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

#ifndef FEDSV_EXPERIMENTS_ORACLE_CHECKS_H_
#define FEDSV_EXPERIMENTS_ORACLE_CHECKS_H_

#include <cstdint>
#include <string>

#include "fedsv/estimators/estimators.h"

namespace fedsv::experiments {

// Outcome of repeated estimator runs against brute-force exact values on
// hashed random round games with a fixed one-block history.
struct ContractResult {
  std::string estimator;
  int players = 0;
  int trials = 0;
  int successes = 0;
  // Largest coordinate error seen in any trial.
  double worst_error = 0.0;
  // Largest |sum of estimates - (U(H + all) - U(H))| over trials.
  double worst_efficiency_residual = 0.0;
  // Utility evaluations per trial.
  std::int64_t samples = 0;
  double required_rate = 0.0;

  double success_rate() const {
    return trials > 0 ? static_cast<double>(successes) / trials : 0.0;
  }
  bool pass() const { return success_rate() >= required_rate; }
};

// A trial succeeds when every coordinate is within epsilon. The required
// success rate is 1 - delta.
ContractResult CheckPermutationContract(int players,
                                        const estimators::ApproxParams& params,
                                        int trials, std::uint64_t seed,
                                        int threads = 1);
ContractResult CheckGroupTestingContract(int players,
                                         const estimators::ApproxParams& params,
                                         int trials, std::uint64_t seed,
                                         int threads = 1);

// Largest gap between the subset and permutation forms of the exact value
// over `games` hashed games with 1..max_players players.
double FormEquivalenceGap(int games, int max_players, std::uint64_t seed);

}  // namespace fedsv::experiments

#endif  // FEDSV_EXPERIMENTS_ORACLE_CHECKS_H_
