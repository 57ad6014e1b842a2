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

#ifndef FEDSV_ESTIMATORS_ESTIMATORS_H_
#define FEDSV_ESTIMATORS_ESTIMATORS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fedsv/valuation/game.h"
#include "fedsv/valuation/value_vector.h"

namespace fedsv::estimators {

// (epsilon, delta) target for a per-round estimate with utilities in
// [0, range_bound]. c_eps and c_delta split the error budget between the
// pairwise-difference tests and the pivot estimate of group testing.
struct ApproxParams {
  double epsilon = 0.1;
  double delta = 0.1;
  double range_bound = 1.0;
  double c_eps = 2.0;
  double c_delta = 2.0;

  // Throws ParameterError.
  void Validate() const;

  friend bool operator==(const ApproxParams&, const ApproxParams&) = default;
};

// Number of random permutations needed for an (epsilon, delta) estimate of m
// values: ceil((2 r^2 / eps^2) ln(2m / delta)), at least 1.
std::int64_t PermutationSampleCount(const ApproxParams& p, int m);

// h(u) = (1 + u) ln(1 + u) - u, defined for u > -1.
double HBernstein(double u);

struct GroupTestingPlan {
  int m = 0;
  double z = 0.0;
  // q[k - 1] is the probability of drawing a test of size k, k = 1..m-1.
  std::vector<double> q;
  double q_tot = 0.0;
  // Number of group tests.
  std::int64_t t1 = 0;
  // Number of sampled marginals for the pivot participant.
  std::int64_t t2 = 0;
};

// Throws ParameterError for m < 2 or invalid params, and ParameterError
// naming the degenerate plan when q_tot >= 1.
GroupTestingPlan MakeGroupTestingPlan(int m, const ApproxParams& p);

struct TradeoffChoice {
  double c_eps = 0.0;
  double c_delta = 0.0;
  std::int64_t total_evaluations = 0;
};

// Grid search over (c_eps, c_delta) minimizing t1 + t2. Grid values <= 1 are
// skipped.
TradeoffChoice OptimizeTradeoff(int m, const ApproxParams& p,
                                std::span<const double> grid);

// Rows are group tests, columns are positions in the round's sorted player
// list.
struct TestMatrix {
  int m = 0;
  std::vector<std::uint8_t> membership;  // row-major, T1 x m
  std::vector<double> utilities;         // B_t

  std::int64_t tests() const { return static_cast<std::int64_t>(utilities.size()); }
  bool member(std::int64_t t, int i) const {
    return membership[static_cast<std::size_t>(t) * m + i] != 0;
  }
};

// Estimated Shapley differences, C(i, j) ~ s_i - s_j, indexed by position.
class DifferenceMatrix {
 public:
  DifferenceMatrix() = default;
  explicit DifferenceMatrix(int m) : m_(m), data_(std::size_t(m) * m, 0.0) {}

  int size() const { return m_; }
  double operator()(int i, int j) const { return data_[std::size_t(i) * m_ + j]; }
  double& operator()(int i, int j) { return data_[std::size_t(i) * m_ + j]; }

 private:
  int m_ = 0;
  std::vector<double> data_;
};

struct EstimatorOptions {
  int threads = 1;
};

struct EstimatorDiagnostics {
  std::int64_t permutation_samples = 0;
  std::int64_t t1 = 0;
  std::int64_t t2 = 0;
  double q_tot = 0.0;
  std::vector<double> test_utilities;
  std::int64_t utility_evaluations = 0;
};

// Monte Carlo estimate of the per-round federated Shapley value from
// `sample_count` uniformly random join orders. Each permutation starts from
// the baseline U(history) and credits each marginal to the participant who
// joined, so the estimates always sum to U(history + I_t) - U(history).
ValueVector PermutationSamplingRound(const UtilityOracle& oracle,
                                     const CoalitionSequence& history,
                                     const Coalition& round_players,
                                     std::int64_t sample_count,
                                     std::uint64_t seed,
                                     const EstimatorOptions& options = {},
                                     EstimatorDiagnostics* diagnostics = nullptr);

// Draws plan.t1 tests: a size k ~ q, then a uniform size-k subset S, and
// records B_t = U(history + S).
TestMatrix RunGroupTests(const UtilityOracle& oracle,
                         const CoalitionSequence& history,
                         const Coalition& round_players,
                         const GroupTestingPlan& plan, std::uint64_t seed,
                         const EstimatorOptions& options = {});

// C(i, j) = (Z / T1) sum_t B_t (A_ti - A_tj). Built from the column against
// the last position so that C(i, j) = C(i, m) - C(j, m) holds exactly.
DifferenceMatrix EstimateDifferences(const TestMatrix& tests,
                                     const GroupTestingPlan& plan);

// Anchors the differences on the last (highest-id) player. Its value is
// estimated from plan.t2 marginals U(history + S + {pivot}) - U(history + S)
// with |S| uniform on {0..m-1} and S uniform given its size.
ValueVector DiffToSv(const DifferenceMatrix& differences,
                     const UtilityOracle& oracle,
                     const CoalitionSequence& history,
                     const Coalition& round_players,
                     const GroupTestingPlan& plan, std::uint64_t seed,
                     const EstimatorOptions& options = {});

// RunGroupTests -> EstimateDifferences -> DiffToSv.
ValueVector GroupTestingRound(const UtilityOracle& oracle,
                              const CoalitionSequence& history,
                              const Coalition& round_players,
                              const GroupTestingPlan& plan, std::uint64_t seed,
                              const EstimatorOptions& options = {},
                              EstimatorDiagnostics* diagnostics = nullptr);

}  // namespace fedsv::estimators

#endif  // FEDSV_ESTIMATORS_ESTIMATORS_H_
