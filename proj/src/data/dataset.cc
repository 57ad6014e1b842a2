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

#include "fedsv/data/dataset.h"

#include <cmath>
#include <random>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"

namespace fedsv::data {

void Dataset::Validate() const {
  if (dim < 1) throw ParameterError("dataset dimension must be >= 1");
  if (class_count < 1) throw ParameterError("class count must be >= 1");
  if (labels.empty()) throw ParameterError("dataset is empty");
  if (features.size() != labels.size() * static_cast<std::size_t>(dim)) {
    throw ParameterError("feature matrix does not match label count");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw ParameterError("label " + std::to_string(labels[i]) + " at row " +
                           std::to_string(i) + " outside [0, " +
                           std::to_string(class_count) + ")");
    }
  }
  for (const double x : features) {
    if (!std::isfinite(x)) throw ParameterError("non-finite feature value");
  }
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.dim = dim;
  out.class_count = class_count;
  out.features.reserve(indices.size() * dim);
  out.labels.reserve(indices.size());
  for (const std::size_t i : indices) {
    const auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

Dataset Dataset::Slice(std::size_t begin, std::size_t end) const {
  Dataset out;
  out.dim = dim;
  out.class_count = class_count;
  out.features.assign(features.begin() + begin * dim,
                      features.begin() + end * dim);
  out.labels.assign(labels.begin() + begin, labels.begin() + end);
  return out;
}

Dataset SynthBlobs(const BlobSpec& spec) {
  if (spec.dim < 1 || spec.class_count < 1) {
    throw ParameterError("blobs need dim >= 1 and class_count >= 1");
  }
  if (spec.n < static_cast<std::size_t>(spec.class_count)) {
    throw ParameterError("blobs need n >= class_count");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);

  Rng center_rng(DeriveSeed(spec.seed, "blob-centers"));
  std::vector<double> centers(static_cast<std::size_t>(spec.class_count) *
                              spec.dim);
  for (int c = 0; c < spec.class_count; ++c) {
    double norm = 0.0;
    double* center = &centers[static_cast<std::size_t>(c) * spec.dim];
    do {
      norm = 0.0;
      for (int j = 0; j < spec.dim; ++j) {
        center[j] = gauss(center_rng);
        norm += center[j] * center[j];
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (int j = 0; j < spec.dim; ++j) center[j] *= spec.separation / norm;
  }

  Rng sample_rng(DeriveSeed(spec.seed, "blob-samples"));
  Dataset ds;
  ds.dim = spec.dim;
  ds.class_count = spec.class_count;
  ds.features.resize(spec.n * spec.dim);
  ds.labels.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int c = static_cast<int>(i % spec.class_count);
    ds.labels[i] = c;
    const double* center = &centers[static_cast<std::size_t>(c) * spec.dim];
    for (int j = 0; j < spec.dim; ++j) {
      ds.features[i * spec.dim + j] = center[j] + gauss(sample_rng);
    }
  }
  return ds;
}

std::vector<std::size_t> ClassHistogram(const Dataset& ds) {
  std::vector<std::size_t> counts(ds.class_count, 0);
  for (const int y : ds.labels) ++counts[y];
  return counts;
}

}  // namespace fedsv::data
