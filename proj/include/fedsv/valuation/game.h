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

#ifndef FEDSV_VALUATION_GAME_H_
#define FEDSV_VALUATION_GAME_H_

#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace fedsv {

using ParticipantId = int;

// A set of participant ids, kept sorted and duplicate-free.
class Coalition {
 public:
  Coalition() = default;
  // Throws ParameterError on duplicate ids.
  explicit Coalition(std::vector<ParticipantId> ids);
  Coalition(std::initializer_list<ParticipantId> ids)
      : Coalition(std::vector<ParticipantId>(ids)) {}

  const std::vector<ParticipantId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool Contains(ParticipantId id) const;

  // Members selected by the low `size()` bits of mask, in id order.
  Coalition SubsetFromMask(unsigned long long mask) const;
  Coalition Without(ParticipantId id) const;
  Coalition With(ParticipantId id) const;
  bool IsSubsetOf(const Coalition& other) const;

  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  std::vector<ParticipantId> ids_;
};

// Ordered sequence of coalition blocks. Block t holds the participants whose
// updates were aggregated at round t; within a block order is irrelevant.
struct CoalitionSequence {
  std::vector<Coalition> blocks;

  CoalitionSequence Then(Coalition block) const;
  std::size_t size() const { return blocks.size(); }
  bool empty() const { return blocks.empty(); }
  std::string ToString() const;

  friend bool operator==(const CoalitionSequence&,
                         const CoalitionSequence&) = default;
};

// Utility of an ordered sequence of coalitions. Implementations must be
// deterministic and return values in [0, range_bound()]. Evaluate may be
// called concurrently.
class UtilityOracle {
 public:
  virtual ~UtilityOracle() = default;
  virtual double Evaluate(const CoalitionSequence& sequence) const = 0;
  virtual double range_bound() const = 0;
};

// Evaluates and enforces the [0, r] contract; throws OracleError otherwise.
double EvaluateChecked(const UtilityOracle& oracle,
                       const CoalitionSequence& sequence);

// Adapts a callable into an oracle.
class FunctionOracle : public UtilityOracle {
 public:
  using Fn = std::function<double(const CoalitionSequence&)>;
  FunctionOracle(Fn fn, double range_bound);

  double Evaluate(const CoalitionSequence& sequence) const override {
    return fn_(sequence);
  }
  double range_bound() const override { return range_bound_; }

 private:
  Fn fn_;
  double range_bound_;
};

}  // namespace fedsv

#endif  // FEDSV_VALUATION_GAME_H_
