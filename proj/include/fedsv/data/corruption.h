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

#ifndef FEDSV_DATA_CORRUPTION_H_
#define FEDSV_DATA_CORRUPTION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fedsv/data/dataset.h"
#include "fedsv/data/partition.h"

namespace fedsv::data {

enum class CorruptionKind { kNone, kLabelFlip, kBackdoor };

std::string ToString(CorruptionKind kind);
CorruptionKind CorruptionKindFromString(const std::string& s);

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kNone;
  std::vector<int> affected;

  // Label flipping: fraction of each affected shard relabelled.
  double flip_ratio = 0.1;

  // Backdoor: feature indices set to trigger_value, and the label forced to
  // target_label when relabel is set. mix_per_batch of every batch_size
  // consecutive local rows are poisoned.
  std::vector<int> trigger_features;
  double trigger_value = 1.0;
  int target_label = 0;
  int mix_per_batch = 20;
  int batch_size = 64;
  bool relabel = true;

  std::uint64_t seed = 0;

  // Checks these settings against the participant count and the feature
  // dimension.
  void Validate(int participant_count, int dim, int class_count) const;

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

// Within every affected shard, floor(flip_ratio * |shard|) uniformly chosen
// rows get a label drawn uniformly from the other classes. Rows outside
// affected shards are untouched.
Dataset FlipLabels(const Dataset& ds, const PartitionPlan& plan,
                   const CorruptionSpec& spec);

struct BackdoorData {
  Dataset poisoned;
  // Clean test rows whose label differs from the target, stamped with the
  // trigger and relabelled to the target. Accuracy on this set is the attack
  // success rate.
  Dataset triggered_test;
};

BackdoorData ImplantBackdoor(const Dataset& ds, const PartitionPlan& plan,
                             const CorruptionSpec& spec, const Dataset& test);

// Number of poisoned rows in a batch of `len` rows: the full quota for a full
// batch, the proportional floor for a short tail batch.
std::size_t BackdoorQuota(std::size_t len, int mix_per_batch, int batch_size);

}  // namespace fedsv::data

#endif  // FEDSV_DATA_CORRUPTION_H_
