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

#ifndef FEDSV_EXPERIMENTS_PIPELINES_H_
#define FEDSV_EXPERIMENTS_PIPELINES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsv/config/experiment_config.h"
#include "fedsv/data/dataset.h"
#include "fedsv/data/partition.h"
#include "fedsv/experiments/detection.h"
#include "fedsv/fl/federated.h"

namespace fedsv::experiments {

// Method labels used in every result table.
inline constexpr const char* kFedSv = "fedsv";
inline constexpr const char* kFedSvNorm = "fedsv_norm";
inline constexpr const char* kLoo = "loo";
inline constexpr const char* kLooNorm = "loo_norm";
inline constexpr const char* kRandom = "random";

// Shuffles averaged into the random baseline's detection curve.
inline constexpr int kRandomDetectionShuffles = 100;

struct ExperimentData {
  // Training rows after corruption.
  data::Dataset train;
  data::Dataset validation;
  data::Dataset test;
  // Present for backdoor runs.
  std::optional<data::Dataset> triggered_test;
  data::PartitionPlan partition;
  // Corrupted participants, ascending.
  std::vector<ParticipantId> bad;
};

// Affected participants: the explicit list, or affected_count ids drawn from
// the corruption stream.
std::vector<ParticipantId> ResolveAffected(const config::ExperimentConfig& cfg,
                                           const config::ResolvedSeeds& seeds);

// Loads or synthesizes the data, partitions it and applies the corruption.
// Blobs are drawn as one pool and cut into train, validation and test. IDX
// validation rows come after the training rows of the training file. A CSV
// file is cut into train, validation and test in order.
ExperimentData PrepareData(const config::ExperimentConfig& cfg,
                           const config::ResolvedSeeds& seeds);

fl::TrainingConfig ResolvedTraining(const config::ExperimentConfig& cfg,
                                    const config::ResolvedSeeds& seeds);

// The estimator behind "fedsv": the configured method when it is a Shapley
// method, exact otherwise.
fl::ValuationSettings FedSvSettings(const config::ExperimentConfig& cfg,
                                    const config::ResolvedSeeds& seeds);

// One training run valued by every method from the same round records.
struct TrainedRun {
  config::ResolvedSeeds seeds;
  ExperimentData data;
  fl::TrainingConfig training;
  std::vector<fl::RoundRecord> rounds;
  fl::ModelParams final_model;
  ValuationReport fedsv_report;
  ValuationReport loo_report;
  // Total value per method label, covering every participant.
  std::map<std::string, ValueVector> totals;
  double test_accuracy = 0.0;
  std::vector<estimators::EstimatorDiagnostics> diagnostics;
};

TrainedRun TrainAndValue(const config::ExperimentConfig& cfg,
                         std::uint64_t master_seed);

// Values already recorded rounds, e.g. loaded from snapshots.
TrainedRun ValueRecordedRun(const config::ExperimentConfig& cfg,
                            std::uint64_t master_seed,
                            std::vector<fl::RoundRecord> rounds);

struct MethodCurve {
  std::string method;
  DetectionCurve curve;
};

struct DetectionRun {
  std::uint64_t seed = 0;
  std::vector<ParticipantId> bad;
  // fedsv, fedsv_norm, loo, loo_norm, random.
  std::vector<MethodCurve> curves;
  double test_accuracy = 0.0;
  std::optional<double> attack_success_rate;
  std::vector<double> round_norms;

  const DetectionCurve& Curve(const std::string& method) const;
};

// Detection curves of one trained run. The random curve is the mean over
// kRandomDetectionShuffles uniform random valuations.
DetectionRun EvaluateDetection(const TrainedRun& run);

// Both throw ConfigError unless the configured corruption matches.
DetectionRun RunNoisyDetection(const config::ExperimentConfig& cfg,
                               std::uint64_t master_seed);
DetectionRun RunBackdoorDetection(const config::ExperimentConfig& cfg,
                                  std::uint64_t master_seed);

struct SummarizationResult {
  std::uint64_t seed = 0;
  std::vector<double> dismiss_fractions;
  // fedsv, fedsv_norm, loo, random.
  std::vector<std::string> methods;
  // test_accuracy[method][q].
  std::vector<std::vector<double>> test_accuracy;
  // Accuracy of the unfiltered run.
  double baseline_accuracy = 0.0;

  double Accuracy(const std::string& method, std::size_t q_index) const;
};

// Participants dismissed from a round of m selected: floor(q * m), keeping
// at least one.
int DismissCount(double q, int selected);

// Retrains along the recorded selections, dropping in each round the
// lowest-valued selected participants by each method's frozen totals. The
// random baseline drops uniformly chosen participants and is averaged over
// random_repeats. Throws ParameterError when `run` has no rounds.
SummarizationResult RunSummarization(const config::ExperimentConfig& cfg,
                                     const TrainedRun& run);

// Seeds an experiment iterates over: experiment.seeds, or the master seed.
std::vector<std::uint64_t> ExperimentSeeds(const config::ExperimentConfig& cfg);

// Tab-separated tables; reals printed with %.17g.
std::string FormatReal(double v);
std::string DetectionCurveTable(const std::vector<DetectionRun>& runs);
std::string DetectionAucTable(const std::vector<DetectionRun>& runs);
std::string AttackTable(const std::vector<DetectionRun>& runs);
std::string SummarizationTable(const std::vector<SummarizationResult>& results);
std::string RoundNormTable(const std::vector<DetectionRun>& runs);
std::string ValueTable(const TrainedRun& run);

}  // namespace fedsv::experiments

#endif  // FEDSV_EXPERIMENTS_PIPELINES_H_
