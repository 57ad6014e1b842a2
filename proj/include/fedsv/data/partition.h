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

#ifndef FEDSV_DATA_PARTITION_H_
#define FEDSV_DATA_PARTITION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fedsv/data/dataset.h"

namespace fedsv::data {

enum class PartitionMode { kIid, kShardNonIid };

std::string ToString(PartitionMode mode);
PartitionMode PartitionModeFromString(const std::string& s);

// assignment[p] lists the dataset rows held by participant p.
struct PartitionPlan {
  PartitionMode mode = PartitionMode::kIid;
  int participant_count = 0;
  int shards_per_participant = 1;
  std::vector<std::vector<std::size_t>> assignment;

  friend bool operator==(const PartitionPlan&, const PartitionPlan&) = default;
};

// Shuffles all rows and cuts them into N contiguous runs whose sizes differ by
// at most one.
PartitionPlan PartitionIid(const Dataset& ds, int participant_count,
                           std::uint64_t seed);

// Sorts rows by label, cuts them into shard_count equal shards and hands each
// participant shards_per_participant random shards.
PartitionPlan PartitionNonIidShards(const Dataset& ds, int participant_count,
                                    int shard_count,
                                    int shards_per_participant,
                                    std::uint64_t seed);

// Throws ParameterError unless the plan is a disjoint cover of [0, n).
void ValidatePartition(const PartitionPlan& plan, std::size_t n);

// Mean over participants of the Shannon entropy (nats) of their local label
// distribution.
double MeanLabelEntropy(const Dataset& ds, const PartitionPlan& plan);

std::string PartitionToJson(const PartitionPlan& plan);
PartitionPlan PartitionFromJson(const std::string& text);

}  // namespace fedsv::data

#endif  // FEDSV_DATA_PARTITION_H_
