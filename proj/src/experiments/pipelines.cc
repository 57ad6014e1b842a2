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

#include "fedsv/experiments/pipelines.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"
#include "fedsv/data/corruption.h"
#include "fedsv/data/loaders.h"

namespace fedsv::experiments {
namespace {

data::Dataset TakeRows(const data::Dataset& ds, std::size_t begin,
                       std::size_t count, const std::string& what) {
  if (begin + count > ds.size()) {
    throw ConfigError("/dataset", what + " needs rows [" +
                                      std::to_string(begin) + ", " +
                                      std::to_string(begin + count) +
                                      ") but the file has " +
                                      std::to_string(ds.size()));
  }
  return ds.Slice(begin, begin + count);
}

void UnifyClassCount(ExperimentData& d) {
  const int c = std::max({d.train.class_count, d.validation.class_count,
                          d.test.class_count});
  d.train.class_count = c;
  d.validation.class_count = c;
  d.test.class_count = c;
}

data::CorruptionSpec MakeCorruptionSpec(const config::ExperimentConfig& cfg,
                                        const config::ResolvedSeeds& seeds,
                                        std::vector<ParticipantId> affected) {
  const auto& c = cfg.corruption;
  data::CorruptionSpec spec;
  spec.kind = c.kind;
  spec.affected = std::move(affected);
  spec.flip_ratio = c.flip_ratio;
  spec.trigger_features = c.trigger_features;
  spec.trigger_value = c.trigger_value;
  spec.target_label = c.target_label;
  spec.mix_per_batch = c.mix_per_batch;
  spec.batch_size = c.batch_size;
  spec.relabel = c.relabel;
  spec.seed = seeds.corruption;
  return spec;
}

ValueVector Covering(ValueVector v, int participant_count) {
  v.round_index.reset();
  v.FillUniverse(participant_count);
  return v;
}

}  // namespace

std::vector<ParticipantId> ResolveAffected(const config::ExperimentConfig& cfg,
                                           const config::ResolvedSeeds& seeds) {
  const auto& c = cfg.corruption;
  if (c.kind == data::CorruptionKind::kNone) return {};
  std::vector<ParticipantId> ids;
  if (c.affected_count > 0) {
    ids.resize(cfg.partition.participants);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng = MakeRng(DeriveSeed(seeds.corruption, "affected"));
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(c.affected_count);
  } else {
    ids.assign(c.affected.begin(), c.affected.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

ExperimentData PrepareData(const config::ExperimentConfig& cfg,
                           const config::ResolvedSeeds& seeds) {
  config::ValidateConfig(cfg);
  const auto& d = cfg.dataset;
  ExperimentData out;
  if (d.kind == "blobs") {
    data::BlobSpec spec;
    spec.n = d.train_size + d.validation_size + d.test_size;
    spec.dim = d.dim;
    spec.class_count = d.class_count;
    spec.separation = d.separation;
    spec.seed = seeds.dataset;
    const data::Dataset pool = data::SynthBlobs(spec);
    out.train = pool.Slice(0, d.train_size);
    out.validation = pool.Slice(d.train_size, d.train_size + d.validation_size);
    out.test = pool.Slice(d.train_size + d.validation_size, pool.size());
  } else if (d.kind == "idx") {
    const data::Dataset train = data::LoadIdx(d.train_images, d.train_labels);
    const data::Dataset test = data::LoadIdx(d.test_images, d.test_labels);
    out.train = TakeRows(train, 0, d.train_size, "training");
    out.validation =
        TakeRows(train, d.train_size, d.validation_size, "validation");
    out.test = TakeRows(test, 0, d.test_size, "test");
  } else {
    data::DelimitedOptions options;
    options.delimiter = d.delimiter.at(0);
    options.label_column = d.label_column;
    options.has_header = d.has_header;
    const data::Dataset all = data::LoadDelimited(d.path, options);
    out.train = TakeRows(all, 0, d.train_size, "training");
    out.validation =
        TakeRows(all, d.train_size, d.validation_size, "validation");
    out.test = TakeRows(all, d.train_size + d.validation_size, d.test_size,
                        "test");
  }
  UnifyClassCount(out);

  const auto& p = cfg.partition;
  if (p.mode == data::PartitionMode::kIid) {
    out.partition =
        data::PartitionIid(out.train, p.participants, seeds.partition);
  } else {
    out.partition = data::PartitionNonIidShards(
        out.train, p.participants, p.participants * p.shards_per_participant,
        p.shards_per_participant, seeds.partition);
  }

  out.bad = ResolveAffected(cfg, seeds);
  const data::CorruptionSpec spec = MakeCorruptionSpec(cfg, seeds, out.bad);
  spec.Validate(p.participants, out.train.dim, out.train.class_count);
  switch (spec.kind) {
    case data::CorruptionKind::kNone:
      break;
    case data::CorruptionKind::kLabelFlip:
      out.train = data::FlipLabels(out.train, out.partition, spec);
      break;
    case data::CorruptionKind::kBackdoor: {
      data::BackdoorData b =
          data::ImplantBackdoor(out.train, out.partition, spec, out.test);
      out.train = std::move(b.poisoned);
      out.triggered_test = std::move(b.triggered_test);
      break;
    }
  }
  return out;
}

fl::TrainingConfig ResolvedTraining(const config::ExperimentConfig& cfg,
                                    const config::ResolvedSeeds& seeds) {
  fl::TrainingConfig t = cfg.training;
  t.seed = seeds.training;
  return t;
}

fl::ValuationSettings FedSvSettings(const config::ExperimentConfig& cfg,
                                    const config::ResolvedSeeds& seeds) {
  fl::ValuationSettings s = config::MakeValuationSettings(cfg, seeds);
  if (s.method != fl::ValuationMethod::kExact &&
      s.method != fl::ValuationMethod::kPermutation &&
      s.method != fl::ValuationMethod::kGroupTesting) {
    s.method = fl::ValuationMethod::kExact;
  }
  return s;
}

TrainedRun ValueRecordedRun(const config::ExperimentConfig& cfg,
                            std::uint64_t master_seed,
                            std::vector<fl::RoundRecord> rounds) {
  TrainedRun run;
  run.seeds = config::ResolveSeeds(master_seed);
  run.data = PrepareData(cfg, run.seeds);
  run.training = ResolvedTraining(cfg, run.seeds);
  run.rounds = std::move(rounds);
  if (run.rounds.empty()) throw ParameterError("no round records to value");
  run.final_model = run.rounds.back().global_after;
  const int n = cfg.partition.participants;
  const fl::Metric metric = run.training.metric;

  run.fedsv_report =
      fl::ValueRounds(run.rounds, run.data.validation, metric,
                      FedSvSettings(cfg, run.seeds), n, &run.diagnostics);
  fl::ValuationSettings loo = config::MakeValuationSettings(cfg, run.seeds);
  loo.method = fl::ValuationMethod::kLoo;
  run.loo_report = fl::ValueRounds(run.rounds, run.data.validation, metric,
                                   loo, n);

  run.totals[kFedSv] = Covering(run.fedsv_report.total, n);
  run.totals[kFedSvNorm] =
      Covering(AggregateNormalized(run.fedsv_report.per_round), n);
  run.totals[kLoo] = Covering(run.loo_report.total, n);
  run.totals[kLooNorm] =
      Covering(AggregateNormalized(run.loo_report.per_round), n);

  ValueVector random;
  Rng rng = MakeRng(DeriveSeed(run.seeds.baseline, "totals"));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int id = 0; id < n; ++id) random.values[id] = uniform(rng);
  run.totals[kRandom] = random;

  run.test_accuracy = fl::EvaluateUtility(run.final_model, run.data.test,
                                          fl::Metric::kAccuracy);
  return run;
}

TrainedRun TrainAndValue(const config::ExperimentConfig& cfg,
                         std::uint64_t master_seed) {
  const config::ResolvedSeeds seeds = config::ResolveSeeds(master_seed);
  const ExperimentData data = PrepareData(cfg, seeds);
  fl::ValuationSettings none = config::MakeValuationSettings(cfg, seeds);
  none.method = fl::ValuationMethod::kNone;
  fl::TrainingHooks hooks;
  hooks.threads = cfg.threads;
  fl::TrainingResult trained =
      fl::RunFederatedTraining(data.train, data.partition, data.validation,
                               ResolvedTraining(cfg, seeds), none, hooks);
  return ValueRecordedRun(cfg, master_seed, std::move(trained.rounds));
}

const DetectionCurve& DetectionRun::Curve(const std::string& method) const {
  for (const auto& c : curves) {
    if (c.method == method) return c.curve;
  }
  throw ParameterError("no detection curve for method " + method);
}

DetectionRun EvaluateDetection(const TrainedRun& run) {
  DetectionRun out;
  out.seed = run.seeds.master;
  out.bad = run.data.bad;
  const std::set<ParticipantId> bad(out.bad.begin(), out.bad.end());
  for (const char* method : {kFedSv, kFedSvNorm, kLoo, kLooNorm}) {
    out.curves.push_back(
        {method, ComputeDetectionCurve(run.totals.at(method), bad)});
  }
  std::vector<DetectionCurve> shuffles;
  const int n = run.data.partition.participant_count;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int s = 0; s < kRandomDetectionShuffles; ++s) {
    Rng rng = MakeRng(DeriveSeed(run.seeds.baseline, "detection", s));
    ValueVector v;
    for (int id = 0; id < n; ++id) v.values[id] = uniform(rng);
    shuffles.push_back(ComputeDetectionCurve(v, bad));
  }
  out.curves.push_back({kRandom, MeanCurve(shuffles)});
  out.test_accuracy = run.test_accuracy;
  if (run.data.triggered_test) {
    out.attack_success_rate = fl::EvaluateUtility(
        run.final_model, *run.data.triggered_test, fl::Metric::kAccuracy);
  }
  out.round_norms = RoundContributionNorms(run.fedsv_report);
  return out;
}

DetectionRun RunNoisyDetection(const config::ExperimentConfig& cfg,
                               std::uint64_t master_seed) {
  if (cfg.corruption.kind != data::CorruptionKind::kLabelFlip) {
    throw ConfigError("/corruption/kind",
                      "noisy detection needs label_flip corruption");
  }
  return EvaluateDetection(TrainAndValue(cfg, master_seed));
}

DetectionRun RunBackdoorDetection(const config::ExperimentConfig& cfg,
                                  std::uint64_t master_seed) {
  if (cfg.corruption.kind != data::CorruptionKind::kBackdoor) {
    throw ConfigError("/corruption/kind",
                      "backdoor detection needs backdoor corruption");
  }
  return EvaluateDetection(TrainAndValue(cfg, master_seed));
}

double SummarizationResult::Accuracy(const std::string& method,
                                     std::size_t q_index) const {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i] == method) return test_accuracy.at(i).at(q_index);
  }
  throw ParameterError("no summarization row for method " + method);
}

int DismissCount(double q, int selected) {
  const int k = static_cast<int>(std::floor(q * selected + 1e-9));
  return std::clamp(k, 0, std::max(selected - 1, 0));
}

namespace {

// Keeps the selected participants outside the `dismiss` lowest by `values`,
// ties broken by ascending id.
Coalition KeepHighest(const Coalition& selected, const ValueVector& values,
                      int dismiss) {
  std::vector<std::pair<double, ParticipantId>> order;
  for (const ParticipantId id : selected) order.emplace_back(values.Get(id), id);
  std::sort(order.begin(), order.end());
  std::vector<ParticipantId> kept;
  for (std::size_t i = dismiss; i < order.size(); ++i) {
    kept.push_back(order[i].second);
  }
  return Coalition(std::move(kept));
}

Coalition KeepRandom(const Coalition& selected, int dismiss, Rng& rng) {
  std::vector<ParticipantId> ids(selected.begin(), selected.end());
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.erase(ids.begin(), ids.begin() + dismiss);
  return Coalition(std::move(ids));
}

}  // namespace

SummarizationResult RunSummarization(const config::ExperimentConfig& cfg,
                                     const TrainedRun& run) {
  if (run.rounds.empty()) {
    throw ParameterError("summarization needs recorded rounds");
  }
  SummarizationResult out;
  out.seed = run.seeds.master;
  out.dismiss_fractions = cfg.experiment.dismiss_fractions;
  out.methods = {kFedSv, kFedSvNorm, kLoo, kRandom};
  out.baseline_accuracy = run.test_accuracy;

  std::vector<Coalition> selections;
  for (const auto& r : run.rounds) selections.push_back(r.selected);
  const auto accuracy = [&](const fl::ModelParams& model) {
    return fl::EvaluateUtility(model, run.data.test, fl::Metric::kAccuracy);
  };

  for (const std::string& method : out.methods) {
    std::vector<double> row;
    for (std::size_t qi = 0; qi < out.dismiss_fractions.size(); ++qi) {
      const double q = out.dismiss_fractions[qi];
      if (method == kRandom) {
        const int repeats = std::max(cfg.experiment.random_repeats, 1);
        // Offsets from the first repeat keep the mean exact when all
        // repeats agree, as they do when nobody is dismissed.
        double first = 0.0, offsets = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
          const auto keep = [&](int t, const Coalition& selected) {
            Rng rng = MakeRng(DeriveSeed(run.seeds.baseline, "summarize",
                                         static_cast<std::uint64_t>(rep),
                                         static_cast<std::uint64_t>(t)));
            return KeepRandom(selected,
                              DismissCount(q, static_cast<int>(selected.size())),
                              rng);
          };
          const double a = accuracy(fl::ReplayTraining(
              run.data.train, run.data.partition, run.training, selections,
              keep, cfg.threads));
          if (rep == 0) {
            first = a;
          } else {
            offsets += a - first;
          }
        }
        row.push_back(first + offsets / repeats);
      } else {
        const ValueVector& values = run.totals.at(method);
        const auto keep = [&](int, const Coalition& selected) {
          return KeepHighest(selected, values,
                             DismissCount(q, static_cast<int>(selected.size())));
        };
        row.push_back(accuracy(fl::ReplayTraining(run.data.train,
                                                  run.data.partition,
                                                  run.training, selections,
                                                  keep, cfg.threads)));
      }
    }
    out.test_accuracy.push_back(std::move(row));
  }
  return out;
}

std::vector<std::uint64_t> ExperimentSeeds(const config::ExperimentConfig& cfg) {
  if (!cfg.experiment.seeds.empty()) return cfg.experiment.seeds;
  return {cfg.seed};
}

std::string FormatReal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string DetectionCurveTable(const std::vector<DetectionRun>& runs) {
  std::ostringstream os;
  os << "seed\tmethod\tinspected\tdetected\n";
  for (const auto& run : runs) {
    for (const auto& mc : run.curves) {
      for (std::size_t k = 0; k < mc.curve.inspected_fractions.size(); ++k) {
        os << run.seed << '\t' << mc.method << '\t'
           << FormatReal(mc.curve.inspected_fractions[k]) << '\t'
           << FormatReal(mc.curve.detected_fractions[k]) << '\n';
      }
    }
  }
  return os.str();
}

std::string DetectionAucTable(const std::vector<DetectionRun>& runs) {
  std::ostringstream os;
  os << "seed\tmethod\tauc\n";
  std::vector<std::string> methods;
  std::map<std::string, double> sums;
  for (const auto& run : runs) {
    for (const auto& mc : run.curves) {
      os << run.seed << '\t' << mc.method << '\t' << FormatReal(mc.curve.auc)
         << '\n';
      if (!sums.count(mc.method)) methods.push_back(mc.method);
      sums[mc.method] += mc.curve.auc;
    }
  }
  if (!runs.empty()) {
    for (const auto& m : methods) {
      os << "mean\t" << m << '\t'
         << FormatReal(sums[m] / static_cast<double>(runs.size())) << '\n';
    }
  }
  return os.str();
}

std::string AttackTable(const std::vector<DetectionRun>& runs) {
  std::ostringstream os;
  os << "seed\ttest_accuracy\tattack_success_rate\n";
  for (const auto& run : runs) {
    os << run.seed << '\t' << FormatReal(run.test_accuracy) << '\t'
       << (run.attack_success_rate ? FormatReal(*run.attack_success_rate)
                                   : std::string("nan"))
       << '\n';
  }
  return os.str();
}

std::string SummarizationTable(
    const std::vector<SummarizationResult>& results) {
  std::ostringstream os;
  os << "seed\tmethod\tq\ttest_accuracy\n";
  for (const auto& r : results) {
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      for (std::size_t q = 0; q < r.dismiss_fractions.size(); ++q) {
        os << r.seed << '\t' << r.methods[m] << '\t'
           << FormatReal(r.dismiss_fractions[q]) << '\t'
           << FormatReal(r.test_accuracy[m][q]) << '\n';
      }
    }
    os << r.seed << "\tnone\tbaseline\t" << FormatReal(r.baseline_accuracy)
       << '\n';
  }
  return os.str();
}

std::string RoundNormTable(const std::vector<DetectionRun>& runs) {
  std::ostringstream os;
  os << "seed\tround\tnorm\n";
  for (const auto& run : runs) {
    for (std::size_t t = 0; t < run.round_norms.size(); ++t) {
      os << run.seed << '\t' << t << '\t' << FormatReal(run.round_norms[t])
         << '\n';
    }
  }
  return os.str();
}

std::string ValueTable(const TrainedRun& run) {
  std::ostringstream os;
  os << "participant";
  for (const auto& [method, v] : run.totals) os << '\t' << method;
  os << '\n';
  for (int id = 0; id < run.data.partition.participant_count; ++id) {
    os << id;
    for (const auto& [method, v] : run.totals) os << '\t' << FormatReal(v.Get(id));
    os << '\n';
  }
  return os.str();
}

}  // namespace fedsv::experiments
