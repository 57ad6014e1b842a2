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

#include "fedsv/estimators/estimators.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fedsv/common/errors.h"
#include "fedsv/common/parallel.h"
#include "fedsv/common/seeding.h"

namespace fedsv::estimators {
namespace {

// Sample counts are ceilings of real-valued bounds. Values within rounding
// noise of an integer are not bumped to the next one.
std::int64_t CeilCount(double x) {
  if (!std::isfinite(x)) throw ParameterError("sample count is not finite");
  const double c = std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
}

// Samples are processed in fixed-size chunks; partial sums are reduced in
// sample order so the result does not depend on the thread count.
constexpr std::int64_t kChunk = 4096;

// Uniform size-k subset of positions [0, n) as a bit mask.
unsigned long long SampleSubset(int n, int k, Rng& rng) {
  std::vector<int> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  unsigned long long mask = 0;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pos[i], pos[pick(rng)]);
    mask |= 1ULL << pos[i];
  }
  return mask;
}

void CheckPlayers(const Coalition& players, const char* who) {
  if (players.empty()) {
    throw ParameterError(std::string(who) + ": round has no players");
  }
  if (players.size() > 63) {
    throw ParameterError(std::string(who) + ": at most 63 players per round");
  }
}

}  // namespace

void ApproxParams::Validate() const {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("delta must lie in (0, 1)");
  }
  if (!(range_bound > 0.0)) throw ParameterError("range bound must be > 0");
  if (!(c_eps > 1.0) || !(c_delta > 1.0)) {
    throw ParameterError("c_eps and c_delta must be > 1");
  }
}

std::int64_t PermutationSampleCount(const ApproxParams& p, int m) {
  p.Validate();
  if (m < 1) throw ParameterError("player count must be >= 1");
  const double r2 = p.range_bound * p.range_bound;
  return CeilCount(2.0 * r2 / (p.epsilon * p.epsilon) *
                   std::log(2.0 * m / p.delta));
}

double HBernstein(double u) {
  if (!(u > -1.0)) throw ParameterError("h(u) is defined for u > -1 only");
  return (1.0 + u) * std::log1p(u) - u;
}

GroupTestingPlan MakeGroupTestingPlan(int m, const ApproxParams& p) {
  p.Validate();
  if (m < 2) throw ParameterError("group testing needs at least 2 players");
  GroupTestingPlan plan;
  plan.m = m;
  for (int k = 1; k < m; ++k) plan.z += 1.0 / k;
  plan.z *= 2.0;

  plan.q.resize(m - 1);
  for (int k = 1; k < m; ++k) {
    plan.q[k - 1] = (1.0 / k + 1.0 / (m - k)) / plan.z;
  }
  const double md = m;
  plan.q_tot = (md - 2.0) / md * plan.q[0];
  for (int k = 2; k < m; ++k) {
    plan.q_tot +=
        plan.q[k - 1] * (1.0 + 2.0 * k * (k - md) / (md * (md - 1.0)));
  }
  if (plan.q_tot >= 1.0) {
    throw ParameterError("degenerate group testing plan: q_tot >= 1");
  }

  const double spread = 1.0 - plan.q_tot * plan.q_tot;
  const double u =
      2.0 * p.epsilon / (plan.z * p.range_bound * p.c_eps * spread);
  plan.t1 = CeilCount(4.0 / (spread * HBernstein(u)) *
                      std::log(p.c_delta * (md - 1.0) / (2.0 * p.delta)));
  const double ce1 = p.c_eps - 1.0;
  plan.t2 = CeilCount(
      4.0 * p.range_bound * p.range_bound * p.c_eps * p.c_eps /
      (ce1 * ce1 * p.epsilon * p.epsilon) *
      std::log(2.0 * p.c_delta / ((p.c_delta - 1.0) * p.delta)));
  return plan;
}

TradeoffChoice OptimizeTradeoff(int m, const ApproxParams& p,
                                std::span<const double> grid) {
  TradeoffChoice best;
  for (const double ce : grid) {
    if (!(ce > 1.0)) continue;
    for (const double cd : grid) {
      if (!(cd > 1.0)) continue;
      ApproxParams trial = p;
      trial.c_eps = ce;
      trial.c_delta = cd;
      const GroupTestingPlan plan = MakeGroupTestingPlan(m, trial);
      const std::int64_t total = plan.t1 + plan.t2;
      if (best.total_evaluations == 0 || total < best.total_evaluations) {
        best = {ce, cd, total};
      }
    }
  }
  if (best.total_evaluations == 0) {
    throw ParameterError("tradeoff grid has no value above 1");
  }
  return best;
}

ValueVector PermutationSamplingRound(const UtilityOracle& oracle,
                                     const CoalitionSequence& history,
                                     const Coalition& round_players,
                                     std::int64_t sample_count,
                                     std::uint64_t seed,
                                     const EstimatorOptions& options,
                                     EstimatorDiagnostics* diagnostics) {
  CheckPlayers(round_players, "permutation sampling");
  if (sample_count < 1) throw ParameterError("sample_count must be >= 1");
  const int m = static_cast<int>(round_players.size());
  const double baseline = EvaluateChecked(oracle, history.Then(Coalition{}));

  std::vector<double> sums(m, 0.0);
  std::atomic<std::int64_t> completed{0};
  try {
    for (std::int64_t begin = 0; begin < sample_count; begin += kChunk) {
      const std::int64_t n = std::min(kChunk, sample_count - begin);
      std::vector<double> rows(static_cast<std::size_t>(n) * m, 0.0);
      ParallelFor(static_cast<std::size_t>(n), options.threads,
                  [&](std::size_t s) {
        Rng rng(DeriveSeed(seed, "permutation", begin + s));
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        double prev = baseline;
        unsigned long long prefix = 0;
        double* row = &rows[s * m];
        for (const int pos : order) {
          prefix |= 1ULL << pos;
          const double cur = EvaluateChecked(
              oracle, history.Then(round_players.SubsetFromMask(prefix)));
          row[pos] += cur - prev;
          prev = cur;
        }
        completed.fetch_add(1, std::memory_order_relaxed);
      });
      for (std::int64_t s = 0; s < n; ++s) {
        for (int i = 0; i < m; ++i) sums[i] += rows[s * m + i];
      }
    }
  } catch (const Error& e) {
    throw OracleError("permutation sampling aborted after " +
                      std::to_string(completed.load()) + " of " +
                      std::to_string(sample_count) +
                      " permutations: " + e.what());
  }

  ValueVector out;
  for (int i = 0; i < m; ++i) {
    out.values[round_players.ids()[i]] =
        sums[i] / static_cast<double>(sample_count);
  }
  if (diagnostics != nullptr) {
    diagnostics->permutation_samples = sample_count;
    diagnostics->utility_evaluations += 1 + sample_count * m;
  }
  return out;
}

TestMatrix RunGroupTests(const UtilityOracle& oracle,
                         const CoalitionSequence& history,
                         const Coalition& round_players,
                         const GroupTestingPlan& plan, std::uint64_t seed,
                         const EstimatorOptions& options) {
  CheckPlayers(round_players, "group testing");
  const int m = static_cast<int>(round_players.size());
  if (plan.m != m) {
    throw ParameterError("group testing plan was built for " +
                         std::to_string(plan.m) + " players, round has " +
                         std::to_string(m));
  }
  TestMatrix tests;
  tests.m = m;
  tests.membership.assign(static_cast<std::size_t>(plan.t1) * m, 0);
  tests.utilities.assign(static_cast<std::size_t>(plan.t1), 0.0);
  ParallelFor(static_cast<std::size_t>(plan.t1), options.threads,
              [&](std::size_t t) {
    Rng rng(DeriveSeed(seed, "group-test", t));
    std::discrete_distribution<int> size_dist(plan.q.begin(), plan.q.end());
    const int k = size_dist(rng) + 1;
    const unsigned long long mask = SampleSubset(m, k, rng);
    for (int i = 0; i < m; ++i) {
      if (mask & (1ULL << i)) tests.membership[t * m + i] = 1;
    }
    tests.utilities[t] = EvaluateChecked(
        oracle, history.Then(round_players.SubsetFromMask(mask)));
  });
  return tests;
}

DifferenceMatrix EstimateDifferences(const TestMatrix& tests,
                                     const GroupTestingPlan& plan) {
  const int m = tests.m;
  std::vector<double> column(m, 0.0);
  for (std::int64_t t = 0; t < tests.tests(); ++t) {
    for (int i = 0; i < m; ++i) {
      if (tests.member(t, i)) column[i] += tests.utilities[t];
    }
  }
  const double scale = plan.z / static_cast<double>(tests.tests());
  std::vector<double> against_last(m);
  for (int i = 0; i < m; ++i) {
    against_last[i] = scale * (column[i] - column[m - 1]);
  }
  DifferenceMatrix c(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) c(i, j) = against_last[i] - against_last[j];
  }
  return c;
}

ValueVector DiffToSv(const DifferenceMatrix& differences,
                     const UtilityOracle& oracle,
                     const CoalitionSequence& history,
                     const Coalition& round_players,
                     const GroupTestingPlan& plan, std::uint64_t seed,
                     const EstimatorOptions& options) {
  CheckPlayers(round_players, "pivot recovery");
  const int m = static_cast<int>(round_players.size());
  if (differences.size() != m) {
    throw ParameterError("difference matrix does not match the round size");
  }
  if (plan.t2 < 1) throw ParameterError("pivot sample count must be >= 1");
  const int pivot = m - 1;
  const unsigned long long pivot_bit = 1ULL << pivot;

  std::vector<double> marginals(static_cast<std::size_t>(plan.t2));
  ParallelFor(marginals.size(), options.threads, [&](std::size_t t) {
    Rng rng(DeriveSeed(seed, "pivot", t));
    std::uniform_int_distribution<int> size_dist(0, m - 1);
    const unsigned long long others = SampleSubset(m - 1, size_dist(rng), rng);
    marginals[t] =
        EvaluateChecked(oracle, history.Then(round_players.SubsetFromMask(
                                    others | pivot_bit))) -
        EvaluateChecked(oracle,
                        history.Then(round_players.SubsetFromMask(others)));
  });
  double pivot_value = 0.0;
  for (const double x : marginals) pivot_value += x;
  pivot_value /= static_cast<double>(plan.t2);

  ValueVector out;
  for (int i = 0; i < m; ++i) {
    out.values[round_players.ids()[i]] = pivot_value + differences(i, pivot);
  }
  return out;
}

ValueVector GroupTestingRound(const UtilityOracle& oracle,
                              const CoalitionSequence& history,
                              const Coalition& round_players,
                              const GroupTestingPlan& plan, std::uint64_t seed,
                              const EstimatorOptions& options,
                              EstimatorDiagnostics* diagnostics) {
  const TestMatrix tests =
      RunGroupTests(oracle, history, round_players, plan,
                    DeriveSeed(seed, "tests"), options);
  const DifferenceMatrix c = EstimateDifferences(tests, plan);
  ValueVector out = DiffToSv(c, oracle, history, round_players, plan,
                             DeriveSeed(seed, "pivot"), options);
  if (diagnostics != nullptr) {
    diagnostics->t1 = plan.t1;
    diagnostics->t2 = plan.t2;
    diagnostics->q_tot = plan.q_tot;
    diagnostics->test_utilities = tests.utilities;
    diagnostics->utility_evaluations += plan.t1 + 2 * plan.t2;
  }
  return out;
}

}  // namespace fedsv::estimators
