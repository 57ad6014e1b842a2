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

#ifndef FEDSV_DATA_DATASET_H_
#define FEDSV_DATA_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedsv::data {

// Dense labelled examples, features stored row-major.
struct Dataset {
  int dim = 0;
  int class_count = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> row(std::size_t i) {
    return {features.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  // Throws ParameterError when labels are out of range, shapes disagree or a
  // feature is not finite.
  void Validate() const;

  Dataset Subset(std::span<const std::size_t> indices) const;
  // Rows [begin, end).
  Dataset Slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct BlobSpec {
  std::size_t n = 1000;
  int dim = 10;
  int class_count = 5;
  // Distance of each class center from the origin, in units of the
  // per-coordinate noise standard deviation.
  double separation = 3.0;
  std::uint64_t seed = 0;
};

// Gaussian clusters around random class centers. Labels are assigned round
// robin, so class counts differ by at most one.
Dataset SynthBlobs(const BlobSpec& spec);

// Per-class counts.
std::vector<std::size_t> ClassHistogram(const Dataset& ds);

}  // namespace fedsv::data

#endif  // FEDSV_DATA_DATASET_H_
