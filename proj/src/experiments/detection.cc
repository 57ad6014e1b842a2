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

#include "fedsv/experiments/detection.h"

#include <algorithm>

#include "fedsv/common/errors.h"

namespace fedsv::experiments {

std::vector<ParticipantId> RankAscending(const ValueVector& values) {
  std::vector<std::pair<double, ParticipantId>> order;
  order.reserve(values.values.size());
  for (const auto& [id, v] : values.values) order.emplace_back(v, id);
  std::sort(order.begin(), order.end());
  std::vector<ParticipantId> ids;
  ids.reserve(order.size());
  for (const auto& [v, id] : order) ids.push_back(id);
  return ids;
}

DetectionCurve ComputeDetectionCurve(const ValueVector& values,
                                     const std::set<ParticipantId>& bad) {
  if (bad.empty()) throw ParameterError("detection needs a non-empty bad set");
  for (const ParticipantId id : bad) {
    if (!values.values.count(id)) {
      throw ParameterError("bad participant " + std::to_string(id) +
                           " has no value");
    }
  }
  const std::vector<ParticipantId> ranking = RankAscending(values);
  const double n = static_cast<double>(ranking.size());
  const double total_bad = static_cast<double>(bad.size());
  DetectionCurve curve;
  curve.inspected_fractions.push_back(0.0);
  curve.detected_fractions.push_back(0.0);
  std::size_t found = 0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    if (bad.count(ranking[k])) ++found;
    curve.inspected_fractions.push_back(static_cast<double>(k + 1) / n);
    curve.detected_fractions.push_back(static_cast<double>(found) / total_bad);
  }
  for (std::size_t k = 1; k < curve.inspected_fractions.size(); ++k) {
    curve.auc += 0.5 *
                 (curve.detected_fractions[k] + curve.detected_fractions[k - 1]) *
                 (curve.inspected_fractions[k] - curve.inspected_fractions[k - 1]);
  }
  return curve;
}

DetectionCurve MeanCurve(const std::vector<DetectionCurve>& curves) {
  if (curves.empty()) throw ParameterError("no curves to average");
  DetectionCurve mean = curves.front();
  std::fill(mean.detected_fractions.begin(), mean.detected_fractions.end(), 0.0);
  mean.auc = 0.0;
  for (const auto& c : curves) {
    if (c.inspected_fractions != mean.inspected_fractions) {
      throw ParameterError("curves have different inspection grids");
    }
    for (std::size_t k = 0; k < c.detected_fractions.size(); ++k) {
      mean.detected_fractions[k] += c.detected_fractions[k];
    }
    mean.auc += c.auc;
  }
  const double n = static_cast<double>(curves.size());
  for (double& d : mean.detected_fractions) d /= n;
  mean.auc /= n;
  return mean;
}

std::vector<double> RoundContributionNorms(const ValuationReport& report) {
  std::vector<double> norms;
  norms.reserve(report.per_round.size());
  for (const auto& r : report.per_round) norms.push_back(L2Norm(r));
  return norms;
}

}  // namespace fedsv::experiments
