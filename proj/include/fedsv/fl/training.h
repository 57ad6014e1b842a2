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

#ifndef FEDSV_FL_TRAINING_H_
#define FEDSV_FL_TRAINING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fedsv/data/dataset.h"
#include "fedsv/fl/model.h"
#include "fedsv/valuation/game.h"

namespace fedsv::fl {

enum class Metric {
  kAccuracy,
  // exp(-mean cross-entropy): a monotone transform of the negative loss that
  // stays in (0, 1].
  kNegLoss,
};

std::string ToString(Metric metric);
Metric MetricFromString(const std::string& s);

struct TrainingConfig {
  int rounds = 10;
  double participant_fraction = 0.1;
  int local_epochs = 1;
  int batch_size = 32;
  double learning_rate = 0.1;
  // Learning rate at round t is learning_rate * lr_decay^t.
  double lr_decay = 1.0;
  ModelKind model = ModelKind::kLogistic;
  int hidden = 16;
  Metric metric = Metric::kAccuracy;
  std::uint64_t seed = 0;

  // Throws ParameterError.
  void Validate() const;
  // max(ceil(C * N), 1).
  int ParticipantsPerRound(int participant_count) const;
  double LearningRateAt(int round) const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct ParticipantUpdate {
  ParticipantId participant_id = 0;
  int round_index = 0;
  ModelParams updated_params;

  friend bool operator==(const ParticipantUpdate&,
                         const ParticipantUpdate&) = default;
};

// local_epochs of mini-batch SGD on the shard, starting from `global`. The
// shard is reshuffled every epoch from `seed`. Throws TrainingError for an
// empty shard or when the parameters stop being finite.
ParticipantUpdate RunParticipantUpdate(const ModelParams& global,
                                       const data::Dataset& shard,
                                       const TrainingConfig& cfg,
                                       ParticipantId participant_id,
                                       int round_index, std::uint64_t seed);

// Everything needed to re-evaluate U(I_{1:t-1} + S) for any S in the round
// without retraining.
struct RoundRecord {
  int round_index = 0;
  ModelParams global_before;
  Coalition selected;
  // One per selected participant, in id order.
  std::vector<ParticipantUpdate> updates;
  ModelParams global_after;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

// Mean of the subset's updated parameters; the empty subset yields
// global_before. Throws ParameterError for ids outside the round.
ModelParams AggregateSubset(const RoundRecord& round, const Coalition& subset);

// Metric of `params` on `validation`, in [0, 1].
double EvaluateUtility(const ModelParams& params,
                       const data::Dataset& validation, Metric metric);

}  // namespace fedsv::fl

#endif  // FEDSV_FL_TRAINING_H_
