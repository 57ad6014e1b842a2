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

#include "fedsv/valuation/game.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fedsv/common/errors.h"

namespace fedsv {

Coalition::Coalition(std::vector<ParticipantId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
    throw ParameterError("coalition contains a duplicate participant id");
  }
}

bool Coalition::Contains(ParticipantId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

Coalition Coalition::SubsetFromMask(unsigned long long mask) const {
  Coalition out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (mask & (1ULL << i)) out.ids_.push_back(ids_[i]);
  }
  return out;
}

Coalition Coalition::Without(ParticipantId id) const {
  Coalition out;
  out.ids_.reserve(ids_.size());
  for (const auto x : ids_) {
    if (x != id) out.ids_.push_back(x);
  }
  return out;
}

Coalition Coalition::With(ParticipantId id) const {
  if (Contains(id)) return *this;
  Coalition out = *this;
  out.ids_.insert(std::lower_bound(out.ids_.begin(), out.ids_.end(), id), id);
  return out;
}

bool Coalition::IsSubsetOf(const Coalition& other) const {
  return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(),
                       ids_.end());
}

CoalitionSequence CoalitionSequence::Then(Coalition block) const {
  CoalitionSequence out = *this;
  out.blocks.push_back(std::move(block));
  return out;
}

std::string CoalitionSequence::ToString() const {
  std::ostringstream os;
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    if (t) os << " + ";
    os << '{';
    for (std::size_t i = 0; i < blocks[t].size(); ++i) {
      if (i) os << ',';
      os << blocks[t].ids()[i];
    }
    os << '}';
  }
  return os.str();
}

double EvaluateChecked(const UtilityOracle& oracle,
                       const CoalitionSequence& sequence) {
  const double u = oracle.Evaluate(sequence);
  if (!std::isfinite(u) || u < 0.0 || u > oracle.range_bound()) {
    std::ostringstream os;
    os << "utility " << u << " for " << sequence.ToString()
       << " lies outside [0, " << oracle.range_bound() << "]";
    throw OracleError(os.str());
  }
  return u;
}

FunctionOracle::FunctionOracle(Fn fn, double range_bound)
    : fn_(std::move(fn)), range_bound_(range_bound) {
  if (!(range_bound > 0.0)) {
    throw ParameterError("oracle range bound must be positive");
  }
}

}  // namespace fedsv
