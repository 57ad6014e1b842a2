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

#include "fedsv/fl/model.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"

namespace fedsv::fl {
namespace {

// Offsets of each parameter block inside theta.
struct Blocks {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

Blocks BlocksOf(const ModelLayout& l) {
  Blocks b;
  const std::size_t d = l.input_dim, c = l.class_count, h = l.hidden;
  if (l.kind == ModelKind::kLogistic) {
    b.w1 = 0;
    b.b1 = c * d;
  } else {
    b.w1 = 0;
    b.b1 = h * d;
    b.w2 = b.b1 + h;
    b.b2 = b.w2 + c * h;
  }
  return b;
}

// Softmax in place; returns log-sum-exp.
double SoftmaxInPlace(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return mx + std::log(sum);
}

void Hidden(const ModelParams& p, const Blocks& b, std::span<const double> x,
            std::span<double> pre, std::span<double> act) {
  const int d = p.layout.input_dim;
  for (int j = 0; j < p.layout.hidden; ++j) {
    const double* w = &p.theta[b.w1 + static_cast<std::size_t>(j) * d];
    double s = p.theta[b.b1 + j];
    for (int k = 0; k < d; ++k) s += w[k] * x[k];
    pre[j] = s;
    act[j] = s > 0.0 ? s : 0.0;
  }
}

}  // namespace

std::string ToString(ModelKind kind) {
  return kind == ModelKind::kLogistic ? "logistic" : "mlp";
}

ModelKind ModelKindFromString(const std::string& s) {
  if (s == "logistic") return ModelKind::kLogistic;
  if (s == "mlp") return ModelKind::kMlp;
  throw ParameterError("unknown model kind '" + s + "'");
}

std::size_t ModelLayout::ParameterCount() const {
  const std::size_t d = input_dim, c = class_count, h = hidden;
  if (kind == ModelKind::kLogistic) return c * d + c;
  return h * d + h + c * h + c;
}

std::string ModelLayout::ToString() const {
  std::string s = fl::ToString(kind) + "(d=" + std::to_string(input_dim) +
                  ", classes=" + std::to_string(class_count);
  if (kind == ModelKind::kMlp) s += ", hidden=" + std::to_string(hidden);
  return s + ")";
}

bool ModelParams::AllFinite() const {
  return std::all_of(theta.begin(), theta.end(),
                     [](double v) { return std::isfinite(v); });
}

void ModelParams::Validate() const {
  if (layout.input_dim < 1 || layout.class_count < 1 ||
      (layout.kind == ModelKind::kMlp && layout.hidden < 1)) {
    throw ParameterError("invalid model layout " + layout.ToString());
  }
  if (theta.size() != layout.ParameterCount()) {
    throw ParameterError("parameter vector length " +
                         std::to_string(theta.size()) + " does not match " +
                         layout.ToString());
  }
  if (!AllFinite()) throw ParameterError("model has non-finite parameters");
}

ModelParams InitModel(const ModelLayout& layout, std::uint64_t seed) {
  ModelParams p{layout, std::vector<double>(layout.ParameterCount(), 0.0)};
  p.Validate();
  Rng rng(DeriveSeed(seed, "model-init"));
  const Blocks b = BlocksOf(layout);
  if (layout.kind == ModelKind::kLogistic) {
    std::normal_distribution<double> g(0.0, 0.01);
    for (std::size_t i = b.w1; i < b.b1; ++i) p.theta[i] = g(rng);
  } else {
    std::normal_distribution<double> g1(0.0, std::sqrt(2.0 / layout.input_dim));
    for (std::size_t i = b.w1; i < b.b1; ++i) p.theta[i] = g1(rng);
    std::normal_distribution<double> g2(0.0, std::sqrt(1.0 / layout.hidden));
    for (std::size_t i = b.w2; i < b.b2; ++i) p.theta[i] = g2(rng);
  }
  return p;
}

void Logits(const ModelParams& p, std::span<const double> x,
            std::span<double> logits) {
  const ModelLayout& l = p.layout;
  const Blocks b = BlocksOf(l);
  if (l.kind == ModelKind::kLogistic) {
    for (int c = 0; c < l.class_count; ++c) {
      const double* w = &p.theta[b.w1 + static_cast<std::size_t>(c) * l.input_dim];
      double s = p.theta[b.b1 + c];
      for (int k = 0; k < l.input_dim; ++k) s += w[k] * x[k];
      logits[c] = s;
    }
    return;
  }
  std::vector<double> pre(l.hidden), act(l.hidden);
  Hidden(p, b, x, pre, act);
  for (int c = 0; c < l.class_count; ++c) {
    const double* w = &p.theta[b.w2 + static_cast<std::size_t>(c) * l.hidden];
    double s = p.theta[b.b2 + c];
    for (int j = 0; j < l.hidden; ++j) s += w[j] * act[j];
    logits[c] = s;
  }
}

int Predict(const ModelParams& params, std::span<const double> x) {
  std::vector<double> z(params.layout.class_count);
  Logits(params, x, z);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double LossAndGradient(const ModelParams& p, const data::Dataset& ds,
                       std::span<const std::size_t> rows,
                       std::vector<double>* gradient) {
  const ModelLayout& l = p.layout;
  if (ds.dim != l.input_dim) {
    throw ParameterError("dataset dimension " + std::to_string(ds.dim) +
                         " does not match " + l.ToString());
  }
  const Blocks b = BlocksOf(l);
  const int c_count = l.class_count;
  if (gradient != nullptr) gradient->assign(p.theta.size(), 0.0);
  if (rows.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());

  std::vector<double> z(c_count), pre(l.hidden), act(l.hidden),
      dact(l.hidden);
  double loss = 0.0;
  for (const std::size_t r : rows) {
    const auto x = ds.row(r);
    const int y = ds.labels[r];
    if (l.kind == ModelKind::kMlp) Hidden(p, b, x, pre, act);
    Logits(p, x, z);
    const double logit_y = z[y];
    loss += SoftmaxInPlace(z) - logit_y;
    if (gradient == nullptr) continue;
    auto& g = *gradient;
    z[y] -= 1.0;  // d(loss)/d(logits)
    if (l.kind == ModelKind::kLogistic) {
      for (int c = 0; c < c_count; ++c) {
        const double dz = z[c] * inv_n;
        double* gw = &g[b.w1 + static_cast<std::size_t>(c) * l.input_dim];
        for (int k = 0; k < l.input_dim; ++k) gw[k] += dz * x[k];
        g[b.b1 + c] += dz;
      }
      continue;
    }
    std::fill(dact.begin(), dact.end(), 0.0);
    for (int c = 0; c < c_count; ++c) {
      const double dz = z[c] * inv_n;
      const double* w2 = &p.theta[b.w2 + static_cast<std::size_t>(c) * l.hidden];
      double* gw2 = &g[b.w2 + static_cast<std::size_t>(c) * l.hidden];
      for (int j = 0; j < l.hidden; ++j) {
        gw2[j] += dz * act[j];
        dact[j] += dz * w2[j];
      }
      g[b.b2 + c] += dz;
    }
    for (int j = 0; j < l.hidden; ++j) {
      if (pre[j] <= 0.0) continue;
      double* gw1 = &g[b.w1 + static_cast<std::size_t>(j) * l.input_dim];
      for (int k = 0; k < l.input_dim; ++k) gw1[k] += dact[j] * x[k];
      g[b.b1 + j] += dact[j];
    }
  }
  return loss * inv_n;
}

}  // namespace fedsv::fl
