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

#include "fedsv/data/partition.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"
#include "json.hpp"

namespace fedsv::data {

std::string ToString(PartitionMode mode) {
  return mode == PartitionMode::kIid ? "iid" : "noniid";
}

PartitionMode PartitionModeFromString(const std::string& s) {
  if (s == "iid") return PartitionMode::kIid;
  if (s == "noniid") return PartitionMode::kShardNonIid;
  throw ParameterError("unknown partition mode '" + s + "'");
}

PartitionPlan PartitionIid(const Dataset& ds, int participant_count,
                           std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (participant_count < 1 ||
      static_cast<std::size_t>(participant_count) > n) {
    throw ParameterError("IID partition needs 1 <= N <= n (N=" +
                         std::to_string(participant_count) +
                         ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, "partition-iid"));
  std::shuffle(order.begin(), order.end(), rng);

  PartitionPlan plan;
  plan.mode = PartitionMode::kIid;
  plan.participant_count = participant_count;
  plan.shards_per_participant = 1;
  plan.assignment.resize(participant_count);
  const std::size_t base = n / participant_count;
  const std::size_t extra = n % participant_count;
  std::size_t pos = 0;
  for (int p = 0; p < participant_count; ++p) {
    const std::size_t len = base + (static_cast<std::size_t>(p) < extra);
    plan.assignment[p].assign(order.begin() + pos, order.begin() + pos + len);
    pos += len;
  }
  return plan;
}

PartitionPlan PartitionNonIidShards(const Dataset& ds, int participant_count,
                                    int shard_count,
                                    int shards_per_participant,
                                    std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (participant_count < 1 || shards_per_participant < 1) {
    throw ParameterError("non-IID partition needs N >= 1 and >= 1 shard each");
  }
  if (shard_count != participant_count * shards_per_participant) {
    throw ParameterError("shard_count must equal N * shards_per_participant");
  }
  if (n % static_cast<std::size_t>(shard_count) != 0) {
    throw ParameterError("shard_count " + std::to_string(shard_count) +
                         " does not divide n=" + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return ds.labels[a] < ds.labels[b];
                   });

  std::vector<int> shards(shard_count);
  std::iota(shards.begin(), shards.end(), 0);
  Rng rng(DeriveSeed(seed, "partition-shards"));
  std::shuffle(shards.begin(), shards.end(), rng);

  const std::size_t shard_size = n / shard_count;
  PartitionPlan plan;
  plan.mode = PartitionMode::kShardNonIid;
  plan.participant_count = participant_count;
  plan.shards_per_participant = shards_per_participant;
  plan.assignment.resize(participant_count);
  for (int p = 0; p < participant_count; ++p) {
    for (int s = 0; s < shards_per_participant; ++s) {
      const std::size_t shard = shards[p * shards_per_participant + s];
      auto first = order.begin() + shard * shard_size;
      plan.assignment[p].insert(plan.assignment[p].end(), first,
                                first + shard_size);
    }
  }
  return plan;
}

void ValidatePartition(const PartitionPlan& plan, std::size_t n) {
  if (plan.assignment.size() !=
      static_cast<std::size_t>(plan.participant_count)) {
    throw ParameterError("partition lists the wrong number of participants");
  }
  std::vector<bool> seen(n, false);
  std::size_t covered = 0;
  for (const auto& rows : plan.assignment) {
    for (const std::size_t i : rows) {
      if (i >= n) throw ParameterError("partition row index out of range");
      if (seen[i]) {
        throw ParameterError("row " + std::to_string(i) +
                             " assigned twice");
      }
      seen[i] = true;
      ++covered;
    }
  }
  if (covered != n) throw ParameterError("partition does not cover all rows");
}

double MeanLabelEntropy(const Dataset& ds, const PartitionPlan& plan) {
  double total = 0.0;
  for (const auto& rows : plan.assignment) {
    std::vector<double> counts(ds.class_count, 0.0);
    for (const std::size_t i : rows) counts[ds.labels[i]] += 1.0;
    double h = 0.0;
    for (const double c : counts) {
      if (c > 0.0) {
        const double p = c / static_cast<double>(rows.size());
        h -= p * std::log(p);
      }
    }
    total += h;
  }
  return total / static_cast<double>(plan.assignment.size());
}

std::string PartitionToJson(const PartitionPlan& plan) {
  nlohmann::json j;
  j["mode"] = ToString(plan.mode);
  j["participant_count"] = plan.participant_count;
  j["shards_per_participant"] = plan.shards_per_participant;
  j["assignment"] = plan.assignment;
  return j.dump();
}

PartitionPlan PartitionFromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PartitionPlan plan;
    plan.mode = PartitionModeFromString(j.at("mode").get<std::string>());
    plan.participant_count = j.at("participant_count").get<int>();
    plan.shards_per_participant = j.at("shards_per_participant").get<int>();
    plan.assignment =
        j.at("assignment").get<std::vector<std::vector<std::size_t>>>();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("partition plan: ") + e.what());
  }
}

}  // namespace fedsv::data
