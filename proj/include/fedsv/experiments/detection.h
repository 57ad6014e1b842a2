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

#ifndef FEDSV_EXPERIMENTS_DETECTION_H_
#define FEDSV_EXPERIMENTS_DETECTION_H_

#include <set>
#include <vector>

#include "fedsv/valuation/value_vector.h"

namespace fedsv::experiments {

// Recall of bad participants after inspecting the lowest-valued fraction of
// all participants.
struct DetectionCurve {
  std::vector<double> inspected_fractions;
  std::vector<double> detected_fractions;
  double auc = 0.0;
};

// Participants sorted by ascending value, ties broken by ascending id.
std::vector<ParticipantId> RankAscending(const ValueVector& values);

// Inspects participants in RankAscending order, one at a time, so the curve
// has |values| + 1 points from (0, 0) to (1, 1). The area uses the
// trapezoid rule. Throws ParameterError for an empty `bad` set or bad ids
// missing from `values`.
DetectionCurve ComputeDetectionCurve(const ValueVector& values,
                                     const std::set<ParticipantId>& bad);

// Pointwise mean of curves sharing the same inspected fractions.
DetectionCurve MeanCurve(const std::vector<DetectionCurve>& curves);

// L2 norm of every round's values.
std::vector<double> RoundContributionNorms(const ValuationReport& report);

}  // namespace fedsv::experiments

#endif  // FEDSV_EXPERIMENTS_DETECTION_H_
