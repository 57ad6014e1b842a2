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

#include "fedsv/valuation/synthetic_games.h"

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"

namespace fedsv {

double HashedRandomGame::Evaluate(const CoalitionSequence& sequence) const {
  std::uint64_t h = DeriveSeed(seed_, "game");
  for (const auto& block : sequence.blocks) {
    // Appending an empty block leaves the utility unchanged.
    if (block.empty()) continue;
    h = DeriveSeed(h, "block", block.size());
    for (const ParticipantId id : block) {
      h = DeriveSeed(h, "id", static_cast<std::uint64_t>(id));
    }
  }
  // 53 random mantissa bits -> [0, 1].
  const double unit =
      static_cast<double>(h >> 11) / static_cast<double>((1ULL << 53) - 1);
  return unit * range_bound_;
}

AdditiveGame::AdditiveGame(std::map<ParticipantId, double> weights,
                           double range_bound)
    : weights_(std::move(weights)), range_bound_(range_bound) {
  if (!(range_bound > 0.0)) throw ParameterError("range bound must be > 0");
}

double AdditiveGame::Evaluate(const CoalitionSequence& sequence) const {
  double u = 0.0;
  for (const auto& block : sequence.blocks) {
    for (const ParticipantId id : block) {
      const auto it = weights_.find(id);
      if (it != weights_.end()) u += it->second;
    }
  }
  return u;
}

}  // namespace fedsv
