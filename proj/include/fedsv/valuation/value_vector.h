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

#ifndef FEDSV_VALUATION_VALUE_VECTOR_H_
#define FEDSV_VALUATION_VALUE_VECTOR_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fedsv/valuation/game.h"

namespace fedsv {

// Per-participant values for one round (round_index set) or summed over a
// whole run (round_index empty). Ids missing from `values` are worth 0.
struct ValueVector {
  std::map<ParticipantId, double> values;
  std::optional<int> round_index;

  double Get(ParticipantId id) const;
  std::vector<ParticipantId> Ids() const;
  double Sum() const;

  // Adds explicit zero entries for ids in [0, participant_count) that are
  // missing, so the vector covers the whole participant universe.
  void FillUniverse(int participant_count);

  friend bool operator==(const ValueVector&, const ValueVector&) = default;
};

double L2Norm(const ValueVector& v);

// Elementwise sum over rounds. The result covers the union of ids.
ValueVector AggregateRounds(std::span<const ValueVector> per_round);

// v / ||v||_2; the zero vector is returned unchanged.
ValueVector NormalizeRoundValues(const ValueVector& v);

// Normalizes every round, then sums.
ValueVector AggregateNormalized(std::span<const ValueVector> per_round);

struct ValuationReport {
  std::vector<ValueVector> per_round;
  ValueVector total;
  // U(I_{1:t}) - U(I_{1:t-1}) for each round.
  std::vector<double> per_round_utility_delta;
  std::vector<double> round_value_norms;
  // U of the initial model. Sum of totals equals final_utility minus this.
  double initial_utility = 0.0;
  double final_utility = 0.0;

  friend bool operator==(const ValuationReport&,
                         const ValuationReport&) = default;
};

// Fills total and round_value_norms from per_round.
void FinalizeReport(ValuationReport& report);

// Line-oriented record file: one JSON object per round, then one total
// record. Doubles round-trip exactly.
void WriteReport(const ValuationReport& report, std::ostream& os);
ValuationReport ReadReport(std::istream& is);

}  // namespace fedsv

#endif  // FEDSV_VALUATION_VALUE_VECTOR_H_
