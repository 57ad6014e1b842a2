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

#include "fedsv/valuation/value_vector.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "fedsv/common/errors.h"
#include "json.hpp"

namespace fedsv {

double ValueVector::Get(ParticipantId id) const {
  const auto it = values.find(id);
  return it == values.end() ? 0.0 : it->second;
}

std::vector<ParticipantId> ValueVector::Ids() const {
  std::vector<ParticipantId> ids;
  ids.reserve(values.size());
  for (const auto& [id, v] : values) ids.push_back(id);
  return ids;
}

double ValueVector::Sum() const {
  double s = 0.0;
  for (const auto& [id, v] : values) s += v;
  return s;
}

void ValueVector::FillUniverse(int participant_count) {
  for (ParticipantId id = 0; id < participant_count; ++id) {
    values.try_emplace(id, 0.0);
  }
}

double L2Norm(const ValueVector& v) {
  double s = 0.0;
  for (const auto& [id, x] : v.values) s += x * x;
  return std::sqrt(s);
}

ValueVector AggregateRounds(std::span<const ValueVector> per_round) {
  ValueVector total;
  for (const auto& round : per_round) {
    for (const auto& [id, v] : round.values) total.values[id] += v;
  }
  return total;
}

ValueVector NormalizeRoundValues(const ValueVector& v) {
  const double norm = L2Norm(v);
  if (norm == 0.0) return v;
  ValueVector out = v;
  for (auto& [id, x] : out.values) x /= norm;
  return out;
}

ValueVector AggregateNormalized(std::span<const ValueVector> per_round) {
  std::vector<ValueVector> normalized;
  normalized.reserve(per_round.size());
  for (const auto& r : per_round) normalized.push_back(NormalizeRoundValues(r));
  return AggregateRounds(normalized);
}

void FinalizeReport(ValuationReport& report) {
  report.total = AggregateRounds(report.per_round);
  report.round_value_norms.clear();
  for (const auto& r : report.per_round) {
    report.round_value_norms.push_back(L2Norm(r));
  }
}

namespace {

using nlohmann::json;

json ValuesToJson(const ValueVector& v) {
  json arr = json::array();
  for (const auto& [id, x] : v.values) arr.push_back(json::array({id, x}));
  return arr;
}

ValueVector ValuesFromJson(const json& arr) {
  ValueVector v;
  for (const auto& pair : arr) {
    v.values[pair.at(0).get<ParticipantId>()] = pair.at(1).get<double>();
  }
  return v;
}

}  // namespace

void WriteReport(const ValuationReport& report, std::ostream& os) {
  for (std::size_t t = 0; t < report.per_round.size(); ++t) {
    json rec;
    rec["record"] = "round";
    rec["round"] = report.per_round[t].round_index.value_or(static_cast<int>(t));
    rec["utility_delta"] = t < report.per_round_utility_delta.size()
                               ? report.per_round_utility_delta[t]
                               : 0.0;
    rec["norm"] =
        t < report.round_value_norms.size() ? report.round_value_norms[t] : 0.0;
    rec["values"] = ValuesToJson(report.per_round[t]);
    os << rec.dump() << '\n';
  }
  json total;
  total["record"] = "total";
  total["initial_utility"] = report.initial_utility;
  total["final_utility"] = report.final_utility;
  total["values"] = ValuesToJson(report.total);
  os << total.dump() << '\n';
}

ValuationReport ReadReport(std::istream& is) {
  ValuationReport report;
  std::string line;
  int line_no = 0;
  bool saw_total = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const std::string kind = rec.at("record").get<std::string>();
      if (kind == "round") {
        ValueVector v = ValuesFromJson(rec.at("values"));
        v.round_index = rec.at("round").get<int>();
        report.per_round.push_back(std::move(v));
        report.per_round_utility_delta.push_back(
            rec.at("utility_delta").get<double>());
        report.round_value_norms.push_back(rec.at("norm").get<double>());
      } else if (kind == "total") {
        report.total = ValuesFromJson(rec.at("values"));
        report.initial_utility = rec.at("initial_utility").get<double>();
        report.final_utility = rec.at("final_utility").get<double>();
        saw_total = true;
      } else {
        throw FormatError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw FormatError("report line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (!saw_total) throw FormatError("report has no total record");
  return report;
}

}  // namespace fedsv
