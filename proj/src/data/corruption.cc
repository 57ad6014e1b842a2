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

#include "fedsv/data/corruption.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"

namespace fedsv::data {
namespace {

// k distinct positions out of [0, n), in draw order.
std::vector<std::size_t> ChooseRows(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pos[i], pos[pick(rng)]);
  }
  pos.resize(k);
  return pos;
}

void Stamp(std::span<double> row, const CorruptionSpec& spec) {
  for (const int f : spec.trigger_features) row[f] = spec.trigger_value;
}

}  // namespace

std::string ToString(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kNone:
      return "none";
    case CorruptionKind::kLabelFlip:
      return "label_flip";
    case CorruptionKind::kBackdoor:
      return "backdoor";
  }
  return "none";
}

CorruptionKind CorruptionKindFromString(const std::string& s) {
  if (s == "none") return CorruptionKind::kNone;
  if (s == "label_flip") return CorruptionKind::kLabelFlip;
  if (s == "backdoor") return CorruptionKind::kBackdoor;
  throw ParameterError("unknown corruption kind '" + s + "'");
}

void CorruptionSpec::Validate(int participant_count, int dim,
                              int class_count) const {
  for (const int p : affected) {
    if (p < 0 || p >= participant_count) {
      throw ParameterError("affected participant " + std::to_string(p) +
                           " is not a participant");
    }
  }
  if (kind == CorruptionKind::kLabelFlip) {
    if (!(flip_ratio > 0.0 && flip_ratio <= 1.0)) {
      throw ParameterError("flip_ratio must lie in (0, 1]");
    }
    if (class_count < 2) throw ParameterError("flipping needs >= 2 classes");
  }
  if (kind == CorruptionKind::kBackdoor) {
    for (const int f : trigger_features) {
      if (f < 0 || f >= dim) {
        throw ParameterError("trigger feature " + std::to_string(f) +
                             " outside [0, " + std::to_string(dim) + ")");
      }
    }
    if (target_label < 0 || target_label >= class_count) {
      throw ParameterError("backdoor target label out of range");
    }
    if (batch_size < 1 || mix_per_batch < 0 || mix_per_batch > batch_size) {
      throw ParameterError("backdoor needs 0 <= mix_per_batch <= batch_size");
    }
  }
}

Dataset FlipLabels(const Dataset& ds, const PartitionPlan& plan,
                   const CorruptionSpec& spec) {
  spec.Validate(plan.participant_count, ds.dim, ds.class_count);
  Dataset out = ds;
  for (const int p : spec.affected) {
    const auto& rows = plan.assignment[p];
    const auto k = static_cast<std::size_t>(
        std::floor(spec.flip_ratio * static_cast<double>(rows.size())));
    Rng rng(DeriveSeed(spec.seed, "flip", static_cast<std::uint64_t>(p)));
    std::uniform_int_distribution<int> other(1, ds.class_count - 1);
    for (const std::size_t pos : ChooseRows(rows.size(), k, rng)) {
      const std::size_t i = rows[pos];
      out.labels[i] = (ds.labels[i] + other(rng)) % ds.class_count;
    }
  }
  return out;
}

std::size_t BackdoorQuota(std::size_t len, int mix_per_batch, int batch_size) {
  if (len >= static_cast<std::size_t>(batch_size)) {
    return static_cast<std::size_t>(mix_per_batch);
  }
  return len * static_cast<std::size_t>(mix_per_batch) /
         static_cast<std::size_t>(batch_size);
}

BackdoorData ImplantBackdoor(const Dataset& ds, const PartitionPlan& plan,
                             const CorruptionSpec& spec, const Dataset& test) {
  spec.Validate(plan.participant_count, ds.dim, ds.class_count);
  BackdoorData out;
  out.poisoned = ds;
  for (const int p : spec.affected) {
    const auto& rows = plan.assignment[p];
    Rng rng(DeriveSeed(spec.seed, "backdoor", static_cast<std::uint64_t>(p)));
    for (std::size_t begin = 0; begin < rows.size();
         begin += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t len =
          std::min<std::size_t>(spec.batch_size, rows.size() - begin);
      const std::size_t quota =
          BackdoorQuota(len, spec.mix_per_batch, spec.batch_size);
      for (const std::size_t pos : ChooseRows(len, quota, rng)) {
        const std::size_t i = rows[begin + pos];
        Stamp(out.poisoned.row(i), spec);
        if (spec.relabel) out.poisoned.labels[i] = spec.target_label;
      }
    }
  }

  out.triggered_test.dim = test.dim;
  out.triggered_test.class_count = test.class_count;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (test.labels[i] == spec.target_label) continue;
    const auto r = test.row(i);
    out.triggered_test.features.insert(out.triggered_test.features.end(),
                                       r.begin(), r.end());
    Stamp(out.triggered_test.row(out.triggered_test.size()), spec);
    out.triggered_test.labels.push_back(spec.target_label);
  }
  return out;
}

}  // namespace fedsv::data
