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

#ifndef FEDSV_CONFIG_EXPERIMENT_CONFIG_H_
#define FEDSV_CONFIG_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedsv/data/corruption.h"
#include "fedsv/data/dataset.h"
#include "fedsv/data/partition.h"
#include "fedsv/estimators/estimators.h"
#include "fedsv/fl/federated.h"
#include "fedsv/fl/training.h"

namespace fedsv::config {

struct DatasetSpec {
  // "blobs", "idx" or "csv".
  std::string kind = "blobs";
  std::size_t train_size = 2000;
  std::size_t validation_size = 500;
  std::size_t test_size = 1000;
  // blobs
  int dim = 10;
  int class_count = 5;
  double separation = 3.0;
  // idx: train rows come from the train files, validation and test rows from
  // the test files.
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  // csv: one file split into train, validation and test.
  std::string path;
  std::string delimiter = ",";
  int label_column = 0;
  bool has_header = false;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct PartitionSpec {
  data::PartitionMode mode = data::PartitionMode::kIid;
  int participants = 20;
  int shards_per_participant = 2;

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

struct CorruptionConfig {
  data::CorruptionKind kind = data::CorruptionKind::kNone;
  // Explicit ids, or a count drawn from the corruption seed stream.
  std::vector<int> affected;
  int affected_count = 0;
  double flip_ratio = 0.1;
  std::vector<int> trigger_features;
  double trigger_value = 1.0;
  int target_label = 0;
  int mix_per_batch = 20;
  int batch_size = 64;
  bool relabel = true;

  friend bool operator==(const CorruptionConfig&,
                         const CorruptionConfig&) = default;
};

struct ValuationConfig {
  fl::ValuationMethod method = fl::ValuationMethod::kExact;
  bool normalized = false;
  std::optional<estimators::ApproxParams> approx;
  int enumeration_cap = 20;
  bool verbose = false;

  friend bool operator==(const ValuationConfig&,
                         const ValuationConfig&) = default;
};

struct ExperimentSettings {
  // Seeds averaged over by the detection and summarization protocols. Empty
  // means the master seed alone.
  std::vector<std::uint64_t> seeds;
  std::vector<double> dismiss_fractions = {0.0, 0.1, 0.2, 0.3, 0.4,
                                           0.5, 0.6, 0.7, 0.8, 0.9};
  int random_repeats = 3;

  friend bool operator==(const ExperimentSettings&,
                         const ExperimentSettings&) = default;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  PartitionSpec partition;
  CorruptionConfig corruption;
  // training.seed is not part of the document; it is derived from `seed`.
  fl::TrainingConfig training;
  ValuationConfig valuation;
  ExperimentSettings experiment;
  std::string output_directory = "out";
  std::uint64_t seed = 0;
  int threads = 1;

  // JSON pointers of keys that were absent and took their default value.
  std::vector<std::string> defaulted;

  friend bool operator==(const ExperimentConfig& a,
                         const ExperimentConfig& b) {
    return a.dataset == b.dataset && a.partition == b.partition &&
           a.corruption == b.corruption && a.training == b.training &&
           a.valuation == b.valuation && a.experiment == b.experiment &&
           a.output_directory == b.output_directory && a.seed == b.seed &&
           a.threads == b.threads;
  }
};

// Parses and validates a whole document. Throws ConfigError naming the JSON
// pointer of the offending value for unknown keys, type mismatches and
// constraint violations.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// Full document with every default written out.
std::string SerializeConfig(const ExperimentConfig& cfg);

// Cross-field checks; ParseConfig already calls this.
void ValidateConfig(const ExperimentConfig& cfg);

// Named sub-streams of a master seed.
struct ResolvedSeeds {
  std::uint64_t master = 0;
  std::uint64_t dataset = 0;
  std::uint64_t partition = 0;
  std::uint64_t corruption = 0;
  std::uint64_t training = 0;
  std::uint64_t valuation = 0;
  std::uint64_t baseline = 0;
};

ResolvedSeeds ResolveSeeds(std::uint64_t master);

// Estimator parameters to use, with the default (0.1, 0.1) target when the
// document omits them.
estimators::ApproxParams EffectiveApprox(const ValuationConfig& v);

fl::ValuationSettings MakeValuationSettings(const ExperimentConfig& cfg,
                                            const ResolvedSeeds& seeds);

}  // namespace fedsv::config

#endif  // FEDSV_CONFIG_EXPERIMENT_CONFIG_H_
