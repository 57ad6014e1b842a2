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

#ifndef FEDSV_VALUATION_SYNTHETIC_GAMES_H_
#define FEDSV_VALUATION_SYNTHETIC_GAMES_H_

#include <cstdint>
#include <map>

#include "fedsv/valuation/game.h"

namespace fedsv {

// Utility drawn pseudo-randomly from [0, r] for every distinct sequence. The
// history is part of the key, so the same coalition is worth different
// amounts after different histories.
class HashedRandomGame : public UtilityOracle {
 public:
  explicit HashedRandomGame(std::uint64_t seed, double range_bound = 1.0)
      : seed_(seed), range_bound_(range_bound) {}

  double Evaluate(const CoalitionSequence& sequence) const override;
  double range_bound() const override { return range_bound_; }

 private:
  std::uint64_t seed_;
  double range_bound_;
};

// U(sequence) = sum of weights of every id in every block; order-free.
class AdditiveGame : public UtilityOracle {
 public:
  AdditiveGame(std::map<ParticipantId, double> weights, double range_bound);

  double Evaluate(const CoalitionSequence& sequence) const override;
  double range_bound() const override { return range_bound_; }

 private:
  std::map<ParticipantId, double> weights_;
  double range_bound_;
};

}  // namespace fedsv

#endif  // FEDSV_VALUATION_SYNTHETIC_GAMES_H_
