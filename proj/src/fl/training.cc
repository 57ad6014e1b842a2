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

#include "fedsv/fl/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"

namespace fedsv::fl {

std::string ToString(Metric metric) {
  return metric == Metric::kAccuracy ? "accuracy" : "neg_loss";
}

Metric MetricFromString(const std::string& s) {
  if (s == "accuracy") return Metric::kAccuracy;
  if (s == "neg_loss") return Metric::kNegLoss;
  throw ParameterError("unknown metric '" + s + "'");
}

void TrainingConfig::Validate() const {
  if (rounds < 1) throw ParameterError("rounds must be >= 1");
  if (!(participant_fraction > 0.0 && participant_fraction <= 1.0)) {
    throw ParameterError("participant_fraction must lie in (0, 1]");
  }
  if (local_epochs < 1) throw ParameterError("local_epochs must be >= 1");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning_rate must be finite and > 0");
  }
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw ParameterError("lr_decay must lie in (0, 1]");
  }
  if (model == ModelKind::kMlp && hidden < 1) {
    throw ParameterError("mlp hidden width must be >= 1");
  }
}

int TrainingConfig::ParticipantsPerRound(int participant_count) const {
  // C * N can land a hair above an integer (0.3 * 10); do not round it up.
  const double raw = participant_fraction * participant_count;
  const int m = static_cast<int>(std::ceil(raw - 1e-9));
  return std::clamp(m, 1, participant_count);
}

double TrainingConfig::LearningRateAt(int round) const {
  return learning_rate * std::pow(lr_decay, round);
}

ParticipantUpdate RunParticipantUpdate(const ModelParams& global,
                                       const data::Dataset& shard,
                                       const TrainingConfig& cfg,
                                       ParticipantId participant_id,
                                       int round_index, std::uint64_t seed) {
  const std::string who = "participant " + std::to_string(participant_id) +
                          " in round " + std::to_string(round_index);
  if (shard.empty()) throw TrainingError(who + ": empty shard refused");
  if (shard.dim != global.layout.input_dim) {
    throw TrainingError(who + ": shard dimension does not match the model");
  }
  ParticipantUpdate update{participant_id, round_index, global};
  const double lr = cfg.LearningRateAt(round_index);
  if (lr == 0.0) return update;

  Rng rng(seed);
  std::vector<std::size_t> order(shard.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  auto& theta = update.updated_params.theta;
  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> batch(order.data() + begin,
                                               end - begin);
      LossAndGradient(update.updated_params, shard, batch, &grad);
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
    }
    if (!update.updated_params.AllFinite()) {
      throw TrainingError(who + ": local training diverged in epoch " +
                          std::to_string(epoch));
    }
  }
  return update;
}

ModelParams AggregateSubset(const RoundRecord& round, const Coalition& subset) {
  if (subset.empty()) return round.global_before;
  ModelParams out{round.global_before.layout,
                  std::vector<double>(round.global_before.theta.size(), 0.0)};
  for (const ParticipantId id : subset) {
    const auto it = std::lower_bound(
        round.updates.begin(), round.updates.end(), id,
        [](const ParticipantUpdate& u, ParticipantId v) {
          return u.participant_id < v;
        });
    if (it == round.updates.end() || it->participant_id != id) {
      throw ParameterError("participant " + std::to_string(id) +
                           " was not selected in round " +
                           std::to_string(round.round_index));
    }
    const auto& w = it->updated_params.theta;
    for (std::size_t i = 0; i < w.size(); ++i) out.theta[i] += w[i];
  }
  const double inv = 1.0 / static_cast<double>(subset.size());
  for (double& v : out.theta) v *= inv;
  return out;
}

double EvaluateUtility(const ModelParams& params,
                       const data::Dataset& validation, Metric metric) {
  if (validation.empty()) throw ParameterError("validation set is empty");
  if (validation.dim != params.layout.input_dim ||
      validation.class_count > params.layout.class_count) {
    throw ParameterError("validation set does not match " +
                         params.layout.ToString());
  }
  if (metric == Metric::kAccuracy) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < validation.size(); ++i) {
      if (Predict(params, validation.row(i)) == validation.labels[i]) ++correct;
    }
    return static_cast<double>(correct) /
           static_cast<double>(validation.size());
  }
  std::vector<std::size_t> all(validation.size());
  std::iota(all.begin(), all.end(), 0);
  const double loss = LossAndGradient(params, validation, all, nullptr);
  return std::exp(-loss);
}

}  // namespace fedsv::fl
