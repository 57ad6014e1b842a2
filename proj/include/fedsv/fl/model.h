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

#ifndef FEDSV_FL_MODEL_H_
#define FEDSV_FL_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsv/data/dataset.h"

namespace fedsv::fl {

enum class ModelKind { kLogistic, kMlp };

std::string ToString(ModelKind kind);
ModelKind ModelKindFromString(const std::string& s);

// Parameter layout. Logistic: W[C x d], b[C]. MLP: W1[h x d], b1[h],
// W2[C x h], b2[C], ReLU hidden layer. All matrices row-major.
struct ModelLayout {
  ModelKind kind = ModelKind::kLogistic;
  int input_dim = 0;
  int class_count = 0;
  int hidden = 0;

  std::size_t ParameterCount() const;
  std::string ToString() const;

  friend bool operator==(const ModelLayout&, const ModelLayout&) = default;
};

struct ModelParams {
  ModelLayout layout;
  std::vector<double> theta;

  // Throws ParameterError on a length mismatch or non-finite entry.
  void Validate() const;
  bool AllFinite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Small Gaussian weights, zero biases.
ModelParams InitModel(const ModelLayout& layout, std::uint64_t seed);

// Class scores for one example.
void Logits(const ModelParams& params, std::span<const double> x,
            std::span<double> logits);

int Predict(const ModelParams& params, std::span<const double> x);

// Mean softmax cross-entropy over `rows` of ds. When gradient is non-null it
// is resized to the parameter count and receives d(loss)/d(theta).
double LossAndGradient(const ModelParams& params, const data::Dataset& ds,
                       std::span<const std::size_t> rows,
                       std::vector<double>* gradient);

}  // namespace fedsv::fl

#endif  // FEDSV_FL_MODEL_H_
