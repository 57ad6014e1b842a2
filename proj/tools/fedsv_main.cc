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

// fedsv: command-line entry point for training, valuation and the
// detection and summarization experiments.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedsv/common/errors.h"
#include "fedsv/config/experiment_config.h"
#include "fedsv/config/manifest.h"
#include "fedsv/experiments/oracle_checks.h"
#include "fedsv/experiments/pipelines.h"
#include "fedsv/fl/federated.h"

namespace fs = std::filesystem;

namespace fedsv {
namespace {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> method;
  bool normalized = false;
  std::optional<int> threads;
  bool verbose = false;
  std::string snapshot;

  // exact-check only.
  int players = 4;
  double epsilon = 0.05;
  double delta = 0.1;
  int trials = 100;
};

class Run {
 public:
  Run(std::string command, const Flags& flags)
      : flags_(flags) {
    manifest_.command = std::move(command);
    manifest_.started_at = config::NowTimestamp();
  }

  void LoadConfig() {
    manifest_.config_path = flags_.config_path;
    manifest_.config_digest = config::DigestFile(flags_.config_path);
    cfg_ = config::LoadConfig(flags_.config_path);
    if (flags_.seed) {
      cfg_.seed = *flags_.seed;
      cfg_.experiment.seeds = {*flags_.seed};
    }
    if (flags_.out) cfg_.output_directory = *flags_.out;
    if (flags_.method) {
      cfg_.valuation.method = fl::ValuationMethodFromString(*flags_.method);
    }
    if (flags_.normalized) cfg_.valuation.normalized = true;
    if (flags_.threads) cfg_.threads = *flags_.threads;
    if (flags_.verbose) cfg_.valuation.verbose = true;
    config::ValidateConfig(cfg_);
    manifest_.seeds = config::ResolveSeeds(cfg_.seed);
    manifest_.experiment_seeds = experiments::ExperimentSeeds(cfg_);
    manifest_.defaulted = cfg_.defaulted;
  }

  const config::ExperimentConfig& cfg() const { return cfg_; }
  config::RunManifest& manifest() { return manifest_; }

  void CreateOutput() {
    fs::create_directories(cfg_.output_directory);
    out_created_ = true;
  }

  void Emit(const std::string& name, const std::string& contents) {
    config::WriteFileAtomic((fs::path(cfg_.output_directory) / name).string(),
                            contents);
    manifest_.outputs.push_back(name);
  }

  void Log(const std::string& line) const {
    if (cfg_.valuation.verbose) std::cerr << line << '\n';
  }

  int Finish() {
    manifest_.finished_at = config::NowTimestamp();
    if (out_created_) {
      config::WriteFileAtomic(
          (fs::path(cfg_.output_directory) / "manifest.json").string(),
          config::ManifestToJson(manifest_));
    }
    return manifest_.status == "complete" ? 0 : 1;
  }

  int Fail(const std::string& message) {
    std::cerr << "fedsv " << manifest_.command << ": " << message << '\n';
    manifest_.status = manifest_.outputs.empty() ? "failed" : "partial";
    manifest_.error = message;
    Finish();
    return manifest_.status == "complete" ? 0 : 1;
  }

 private:
  Flags flags_;
  config::ExperimentConfig cfg_;
  config::RunManifest manifest_;
  bool out_created_ = false;
};

std::string ReportText(const ValuationReport& report) {
  std::ostringstream os;
  WriteReport(report, os);
  return os.str();
}

std::string TotalsText(const ValuationReport& report, bool normalized,
                       int participants) {
  ValueVector total = normalized ? AggregateNormalized(report.per_round)
                                 : report.total;
  total.FillUniverse(participants);
  std::ostringstream os;
  os << "participant\tvalue\n";
  for (const auto& [id, v] : total.values) {
    os << id << '\t' << experiments::FormatReal(v) << '\n';
  }
  return os.str();
}

void EmitValuation(Run& run, const ValuationReport& report,
                   const std::vector<estimators::EstimatorDiagnostics>& diag) {
  run.Emit("report.jsonl", ReportText(report));
  run.Emit("values.tsv", TotalsText(report, run.cfg().valuation.normalized,
                                    run.cfg().partition.participants));
  run.manifest().per_round = diag;
}

void TrainAndValue(Run& run) {
  const auto& cfg = run.cfg();
  const config::ResolvedSeeds seeds = config::ResolveSeeds(cfg.seed);
  const experiments::ExperimentData data =
      experiments::PrepareData(cfg, seeds);
  run.CreateOutput();
  const fs::path rounds_dir = fs::path(cfg.output_directory) / "rounds";
  fs::create_directories(rounds_dir);
  run.Emit("config.json", config::SerializeConfig(cfg));
  run.Emit("partition.json", data::PartitionToJson(data.partition));
  fl::TrainingHooks hooks;
  hooks.threads = cfg.threads;
  hooks.on_round = [&](const fl::RoundRecord& r) {
    const std::string name = fl::RoundSnapshotName(r.round_index);
    fl::WriteRoundSnapshot(r, (rounds_dir / name).string());
    run.manifest().outputs.push_back("rounds/" + name);
    run.Log("round " + std::to_string(r.round_index) + " recorded");
  };
  const fl::TrainingResult result = fl::RunFederatedTraining(
      data.train, data.partition, data.validation,
      experiments::ResolvedTraining(cfg, seeds),
      config::MakeValuationSettings(cfg, seeds), hooks);
  EmitValuation(run, result.report, result.diagnostics);
}

void ValueReplay(Run& run, const std::string& snapshot) {
  const auto& cfg = run.cfg();
  const std::vector<fl::RoundRecord> rounds = fl::LoadRoundSnapshots(snapshot);
  const config::ResolvedSeeds seeds = config::ResolveSeeds(cfg.seed);
  const experiments::ExperimentData data =
      experiments::PrepareData(cfg, seeds);
  std::vector<estimators::EstimatorDiagnostics> diag;
  const ValuationReport report = fl::ValueRounds(
      rounds, data.validation, cfg.training.metric,
      config::MakeValuationSettings(cfg, seeds), cfg.partition.participants,
      &diag);
  run.CreateOutput();
  EmitValuation(run, report, diag);
}

void Detect(Run& run, bool backdoor) {
  const auto& cfg = run.cfg();
  std::vector<experiments::DetectionRun> results;
  for (const std::uint64_t seed : experiments::ExperimentSeeds(cfg)) {
    run.Log("seed " + std::to_string(seed));
    results.push_back(backdoor ? experiments::RunBackdoorDetection(cfg, seed)
                               : experiments::RunNoisyDetection(cfg, seed));
  }
  run.CreateOutput();
  run.Emit("config.json", config::SerializeConfig(cfg));
  run.Emit("detection_curves.tsv", experiments::DetectionCurveTable(results));
  run.Emit("detection_auc.tsv", experiments::DetectionAucTable(results));
  run.Emit("round_norms.tsv", experiments::RoundNormTable(results));
  if (backdoor) run.Emit("attack.tsv", experiments::AttackTable(results));
  std::cout << experiments::DetectionAucTable(results);
}

void Summarize(Run& run, const std::string& snapshot) {
  const auto& cfg = run.cfg();
  std::vector<experiments::SummarizationResult> results;
  if (!snapshot.empty()) {
    std::vector<fl::RoundRecord> rounds = fl::LoadRoundSnapshots(snapshot);
    results.push_back(experiments::RunSummarization(
        cfg, experiments::ValueRecordedRun(cfg, cfg.seed, std::move(rounds))));
  } else {
    for (const std::uint64_t seed : experiments::ExperimentSeeds(cfg)) {
      run.Log("seed " + std::to_string(seed));
      results.push_back(experiments::RunSummarization(
          cfg, experiments::TrainAndValue(cfg, seed)));
    }
  }
  run.CreateOutput();
  run.Emit("config.json", config::SerializeConfig(cfg));
  run.Emit("summarization.tsv", experiments::SummarizationTable(results));
  std::cout << experiments::SummarizationTable(results);
}

bool ExactCheck(const Flags& flags, std::ostream& os) {
  estimators::ApproxParams params;
  params.epsilon = flags.epsilon;
  params.delta = flags.delta;
  params.Validate();
  const std::uint64_t seed = flags.seed.value_or(0);
  const double gap = experiments::FormEquivalenceGap(60, 6, seed);
  const bool forms_ok = gap <= 1e-9;
  os << "check\tplayers\ttrials\tsuccess_rate\trequired\tworst_error\tresult\n";
  os << "forms\t6\t60\t" << (forms_ok ? 1 : 0) << "\t1\t"
     << experiments::FormatReal(gap) << '\t' << (forms_ok ? "PASS" : "FAIL")
     << '\n';
  bool ok = forms_ok;
  const int threads = flags.threads.value_or(1);
  for (const auto& r :
       {experiments::CheckPermutationContract(flags.players, params,
                                              flags.trials, seed, threads),
        experiments::CheckGroupTestingContract(flags.players, params,
                                               flags.trials, seed, threads)}) {
    os << r.estimator << '\t' << r.players << '\t' << r.trials << '\t'
       << experiments::FormatReal(r.success_rate()) << '\t'
       << experiments::FormatReal(r.required_rate) << '\t'
       << experiments::FormatReal(r.worst_error) << '\t'
       << (r.pass() ? "PASS" : "FAIL") << '\n';
    ok = ok && r.pass();
  }
  return ok;
}

}  // namespace
}  // namespace fedsv

int main(int argc, char** argv) {
  using namespace fedsv;
  CLI::App app{"Federated Shapley value simulator"};
  app.require_subcommand(1);
  Flags flags;

  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", flags.config_path,
                              "Experiment configuration (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Master seed override");
    sub->add_option("--out", flags.out, "Output directory override");
    sub->add_option("--method", flags.method,
                    "Valuation method: exact, perm, gt, loo, random, none");
    sub->add_flag("--normalized", flags.normalized,
                  "Aggregate per-round normalized values");
    sub->add_option("--threads", flags.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", flags.verbose, "Progress on stderr");
  };

  auto* train = app.add_subcommand("train-and-value",
                                   "Train with FedAvg and value every round");
  add_common(train, true);
  auto* replay = app.add_subcommand("value-replay",
                                    "Value rounds from a snapshot directory");
  add_common(replay, true);
  replay->add_option("--snapshot", flags.snapshot, "Round snapshot directory")
      ->required();
  auto* noisy = app.add_subcommand("noisy-detect", "Noisy-label detection");
  add_common(noisy, true);
  auto* backdoor =
      app.add_subcommand("backdoor-detect", "Backdoor participant detection");
  add_common(backdoor, true);
  auto* summarize =
      app.add_subcommand("summarize", "Value-guided participant dismissal");
  add_common(summarize, true);
  summarize->add_option("--snapshot", flags.snapshot,
                        "Reuse recorded rounds instead of training");
  auto* check = app.add_subcommand(
      "exact-check", "Estimators against exact values on synthetic games");
  check->add_option("--seed", flags.seed, "Seed");
  check->add_option("--players", flags.players, "Players per round")
      ->check(CLI::Range(2, 12));
  check->add_option("--epsilon", flags.epsilon, "Error bound");
  check->add_option("--delta", flags.delta, "Failure probability");
  check->add_option("--trials", flags.trials, "Seeded trials")
      ->check(CLI::PositiveNumber);
  check->add_option("--threads", flags.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) {
    try {
      return ExactCheck(flags, std::cout) ? 0 : 1;
    } catch (const std::exception& e) {
      std::cerr << "fedsv exact-check: " << e.what() << '\n';
      return 2;
    }
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run(sub->get_name(), flags);
  try {
    run.LoadConfig();
    if (sub == train) {
      TrainAndValue(run);
    } else if (sub == replay) {
      ValueReplay(run, flags.snapshot);
    } else if (sub == noisy) {
      Detect(run, false);
    } else if (sub == backdoor) {
      Detect(run, true);
    } else {
      Summarize(run, flags.snapshot);
    }
  } catch (const std::exception& e) {
    return run.Fail(e.what());
  }
  return run.Finish();
}
