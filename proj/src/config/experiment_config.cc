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

#include "fedsv/config/experiment_config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "fedsv/common/errors.h"
#include "fedsv/common/seeding.h"
#include "fedsv/valuation/exact.h"
#include "json.hpp"

namespace fedsv::config {
namespace {

using nlohmann::json;

// Typed, path-aware view of one JSON object. Every key read is remembered so
// Done() can reject the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path, std::vector<std::string>* defaulted)
      : j_(j), path_(std::move(path)), defaulted_(defaulted) {
    if (!j_.is_object()) Fail(path_, "expected an object");
  }

  std::string PathOf(const std::string& key) const { return path_ + "/" + key; }

  bool Has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    known_.insert(key);
    if (!j_.contains(key)) {
      defaulted_->push_back(PathOf(key));
      return fallback;
    }
    return Convert<T>(j_.at(key), PathOf(key));
  }

  template <typename T>
  T Require(const std::string& key) {
    known_.insert(key);
    if (!j_.contains(key)) Fail(PathOf(key), "required key is missing");
    return Convert<T>(j_.at(key), PathOf(key));
  }

  // Missing child objects read as empty, so all their keys default.
  Section Child(const std::string& key) {
    known_.insert(key);
    if (!j_.contains(key)) {
      defaulted_->push_back(PathOf(key));
      return Section(kEmpty, PathOf(key), defaulted_);
    }
    return Section(j_.at(key), PathOf(key), defaulted_);
  }

  // Records an optional key that is absent.
  void Absent(const std::string& key) {
    known_.insert(key);
    defaulted_->push_back(PathOf(key));
  }

  void Done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) Fail(PathOf(key), "unknown key");
    }
  }

  [[noreturn]] static void Fail(const std::string& path,
                                const std::string& message) {
    throw ConfigError(path.empty() ? "/" : path, message);
  }

 private:
  template <typename T>
  static T Convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) Fail(path, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) Fail(path, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) Fail(path, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) Fail(path, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) Fail(path, "expected an integer");
      return v.get<T>();
    } else {
      // std::vector<E>
      if (!v.is_array()) Fail(path, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(Convert<typename T::value_type>(
            v[i], path + "/" + std::to_string(i)));
      }
      return out;
    }
  }

  static inline const json kEmpty = json::object();
  const json& j_;
  std::string path_;
  std::vector<std::string>* defaulted_;
  std::set<std::string> known_;
};

void Check(bool ok, const std::string& path, const std::string& message) {
  if (!ok) Section::Fail(path, message);
}

template <typename Fn>
auto Enum(const std::string& path, const std::string& value, Fn parse) {
  try {
    return parse(value);
  } catch (const ParameterError& e) {
    Section::Fail(path, e.what());
  }
}

DatasetSpec ParseDataset(Section s) {
  DatasetSpec d;
  d.kind = s.Get<std::string>("kind", d.kind);
  Check(d.kind == "blobs" || d.kind == "idx" || d.kind == "csv",
        s.PathOf("kind"), "expected one of blobs, idx, csv");
  d.train_size = s.Get<std::uint64_t>("train_size", d.train_size);
  d.validation_size = s.Get<std::uint64_t>("validation_size", d.validation_size);
  d.test_size = s.Get<std::uint64_t>("test_size", d.test_size);
  Check(d.train_size >= 1, s.PathOf("train_size"), "must be >= 1");
  Check(d.validation_size >= 1, s.PathOf("validation_size"), "must be >= 1");
  Check(d.test_size >= 1, s.PathOf("test_size"), "must be >= 1");
  if (d.kind == "blobs") {
    d.dim = s.Get<int>("dim", d.dim);
    d.class_count = s.Get<int>("class_count", d.class_count);
    d.separation = s.Get<double>("separation", d.separation);
    Check(d.dim >= 1, s.PathOf("dim"), "must be >= 1");
    Check(d.class_count >= 2, s.PathOf("class_count"), "must be >= 2");
    Check(d.separation >= 0.0, s.PathOf("separation"), "must be >= 0");
  } else if (d.kind == "idx") {
    d.train_images = s.Require<std::string>("train_images");
    d.train_labels = s.Require<std::string>("train_labels");
    d.test_images = s.Require<std::string>("test_images");
    d.test_labels = s.Require<std::string>("test_labels");
  } else {
    d.path = s.Require<std::string>("path");
    d.delimiter = s.Get<std::string>("delimiter", d.delimiter);
    Check(d.delimiter.size() == 1, s.PathOf("delimiter"),
          "must be a single character");
    d.label_column = s.Get<int>("label_column", d.label_column);
    Check(d.label_column >= 0, s.PathOf("label_column"), "must be >= 0");
    d.has_header = s.Get<bool>("has_header", d.has_header);
  }
  s.Done();
  return d;
}

PartitionSpec ParsePartition(Section s) {
  PartitionSpec p;
  const auto mode = s.Get<std::string>("mode", data::ToString(p.mode));
  p.mode = Enum(s.PathOf("mode"), mode, data::PartitionModeFromString);
  p.participants = s.Get<int>("participants", p.participants);
  Check(p.participants >= 1, s.PathOf("participants"), "must be >= 1");
  p.shards_per_participant =
      s.Get<int>("shards_per_participant", p.shards_per_participant);
  Check(p.shards_per_participant >= 1, s.PathOf("shards_per_participant"),
        "must be >= 1");
  s.Done();
  return p;
}

CorruptionConfig ParseCorruption(Section s) {
  CorruptionConfig c;
  const auto kind = s.Get<std::string>("kind", data::ToString(c.kind));
  c.kind = Enum(s.PathOf("kind"), kind, data::CorruptionKindFromString);
  c.affected = s.Get<std::vector<int>>("affected", c.affected);
  c.affected_count = s.Get<int>("affected_count", c.affected_count);
  Check(c.affected_count >= 0, s.PathOf("affected_count"), "must be >= 0");
  Check(c.affected.empty() || c.affected_count == 0, s.PathOf("affected_count"),
        "give either affected or affected_count, not both");
  c.flip_ratio = s.Get<double>("flip_ratio", c.flip_ratio);
  Check(c.flip_ratio > 0.0 && c.flip_ratio <= 1.0, s.PathOf("flip_ratio"),
        "must lie in (0, 1]");
  c.trigger_features =
      s.Get<std::vector<int>>("trigger_features", c.trigger_features);
  c.trigger_value = s.Get<double>("trigger_value", c.trigger_value);
  c.target_label = s.Get<int>("target_label", c.target_label);
  Check(c.target_label >= 0, s.PathOf("target_label"), "must be >= 0");
  c.mix_per_batch = s.Get<int>("mix_per_batch", c.mix_per_batch);
  c.batch_size = s.Get<int>("batch_size", c.batch_size);
  Check(c.batch_size >= 1, s.PathOf("batch_size"), "must be >= 1");
  Check(c.mix_per_batch >= 0 && c.mix_per_batch <= c.batch_size,
        s.PathOf("mix_per_batch"), "must lie in [0, batch_size]");
  c.relabel = s.Get<bool>("relabel", c.relabel);
  s.Done();
  return c;
}

fl::TrainingConfig ParseTraining(Section s) {
  fl::TrainingConfig t;
  t.rounds = s.Get<int>("rounds", t.rounds);
  Check(t.rounds >= 1, s.PathOf("rounds"), "must be >= 1");
  t.participant_fraction =
      s.Get<double>("participant_fraction", t.participant_fraction);
  Check(t.participant_fraction > 0.0 && t.participant_fraction <= 1.0,
        s.PathOf("participant_fraction"), "must lie in (0, 1]");
  t.local_epochs = s.Get<int>("local_epochs", t.local_epochs);
  Check(t.local_epochs >= 1, s.PathOf("local_epochs"), "must be >= 1");
  t.batch_size = s.Get<int>("batch_size", t.batch_size);
  Check(t.batch_size >= 1, s.PathOf("batch_size"), "must be >= 1");
  t.learning_rate = s.Get<double>("learning_rate", t.learning_rate);
  Check(t.learning_rate > 0.0, s.PathOf("learning_rate"), "must be > 0");
  t.lr_decay = s.Get<double>("lr_decay", t.lr_decay);
  Check(t.lr_decay > 0.0 && t.lr_decay <= 1.0, s.PathOf("lr_decay"),
        "must lie in (0, 1]");
  const auto model = s.Get<std::string>("model", fl::ToString(t.model));
  t.model = Enum(s.PathOf("model"), model, fl::ModelKindFromString);
  t.hidden = s.Get<int>("hidden", t.hidden);
  Check(t.hidden >= 1, s.PathOf("hidden"), "must be >= 1");
  const auto metric = s.Get<std::string>("metric", fl::ToString(t.metric));
  t.metric = Enum(s.PathOf("metric"), metric, fl::MetricFromString);
  s.Done();
  return t;
}

estimators::ApproxParams ParseApprox(Section s) {
  estimators::ApproxParams a;
  a.epsilon = s.Require<double>("epsilon");
  a.delta = s.Require<double>("delta");
  a.range_bound = s.Get<double>("range_bound", a.range_bound);
  a.c_eps = s.Get<double>("c_eps", a.c_eps);
  a.c_delta = s.Get<double>("c_delta", a.c_delta);
  Check(a.epsilon > 0.0, s.PathOf("epsilon"), "must be > 0");
  Check(a.delta > 0.0 && a.delta < 1.0, s.PathOf("delta"), "must lie in (0, 1)");
  Check(a.range_bound > 0.0, s.PathOf("range_bound"), "must be > 0");
  Check(a.c_eps > 1.0, s.PathOf("c_eps"), "must be > 1");
  Check(a.c_delta > 1.0, s.PathOf("c_delta"), "must be > 1");
  s.Done();
  return a;
}

ValuationConfig ParseValuation(Section s) {
  ValuationConfig v;
  const auto method = s.Get<std::string>("method", fl::ToString(v.method));
  v.method = Enum(s.PathOf("method"), method, fl::ValuationMethodFromString);
  v.normalized = s.Get<bool>("normalized", v.normalized);
  if (s.Has("approx")) {
    v.approx = ParseApprox(s.Child("approx"));
  } else {
    s.Absent("approx");
  }
  v.enumeration_cap = s.Get<int>("enumeration_cap", v.enumeration_cap);
  Check(v.enumeration_cap >= 1 && v.enumeration_cap <= kSubsetEnumerationCap,
        s.PathOf("enumeration_cap"),
        "must lie in [1, " + std::to_string(kSubsetEnumerationCap) + "]");
  v.verbose = s.Get<bool>("verbose", v.verbose);
  if ((v.method == fl::ValuationMethod::kPermutation ||
       v.method == fl::ValuationMethod::kGroupTesting) &&
      !v.approx) {
    Section::Fail(s.PathOf("approx"),
                  "required for method " + fl::ToString(v.method));
  }
  s.Done();
  return v;
}

ExperimentSettings ParseExperiment(Section s) {
  ExperimentSettings e;
  e.seeds = s.Get<std::vector<std::uint64_t>>("seeds", e.seeds);
  e.dismiss_fractions =
      s.Get<std::vector<double>>("dismiss_fractions", e.dismiss_fractions);
  for (std::size_t i = 0; i < e.dismiss_fractions.size(); ++i) {
    Check(e.dismiss_fractions[i] >= 0.0 && e.dismiss_fractions[i] <= 0.9,
          s.PathOf("dismiss_fractions") + "/" + std::to_string(i),
          "must lie in [0, 0.9]");
  }
  e.random_repeats = s.Get<int>("random_repeats", e.random_repeats);
  Check(e.random_repeats >= 1, s.PathOf("random_repeats"), "must be >= 1");
  s.Done();
  return e;
}

}  // namespace

void ValidateConfig(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  const auto& p = cfg.partition;
  Check(static_cast<std::size_t>(p.participants) <= d.train_size,
        "/partition/participants", "exceeds the number of training rows");
  if (p.mode == data::PartitionMode::kShardNonIid) {
    const std::size_t shards =
        static_cast<std::size_t>(p.participants) * p.shards_per_participant;
    Check(d.train_size % shards == 0, "/dataset/train_size",
          "must be divisible by participants * shards_per_participant (" +
              std::to_string(shards) + ")");
  }
  const auto& c = cfg.corruption;
  for (std::size_t i = 0; i < c.affected.size(); ++i) {
    Check(c.affected[i] >= 0 && c.affected[i] < p.participants,
          "/corruption/affected/" + std::to_string(i),
          "is not a participant id");
  }
  Check(c.affected_count <= p.participants, "/corruption/affected_count",
        "exceeds the participant count");
  if (d.kind == "blobs") {
    for (std::size_t i = 0; i < c.trigger_features.size(); ++i) {
      Check(c.trigger_features[i] >= 0 && c.trigger_features[i] < d.dim,
            "/corruption/trigger_features/" + std::to_string(i),
            "outside the feature dimension");
    }
    Check(c.target_label < d.class_count, "/corruption/target_label",
          "outside the class range");
  }
  const int m = cfg.training.ParticipantsPerRound(p.participants);
  if (cfg.valuation.method == fl::ValuationMethod::kExact) {
    Check(m <= cfg.valuation.enumeration_cap, "/valuation/method",
          "exact valuation over " + std::to_string(m) +
              " participants per round exceeds enumeration_cap");
  }
  Check(cfg.threads >= 1, "/threads", "must be >= 1");
}

ExperimentConfig ParseConfig(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Section root(doc, "", &cfg.defaulted);
  cfg.dataset = ParseDataset(root.Child("dataset"));
  cfg.partition = ParsePartition(root.Child("partition"));
  cfg.corruption = ParseCorruption(root.Child("corruption"));
  cfg.training = ParseTraining(root.Child("training"));
  cfg.valuation = ParseValuation(root.Child("valuation"));
  cfg.experiment = ParseExperiment(root.Child("experiment"));
  cfg.output_directory = root.Get<std::string>("output", cfg.output_directory);
  cfg.seed = root.Get<std::uint64_t>("seed", cfg.seed);
  cfg.threads = root.Get<int>("threads", cfg.threads);
  root.Done();
  ValidateConfig(cfg);
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string SerializeConfig(const ExperimentConfig& cfg) {
  json j;
  const auto& d = cfg.dataset;
  json& ds = j["dataset"];
  ds["kind"] = d.kind;
  ds["train_size"] = d.train_size;
  ds["validation_size"] = d.validation_size;
  ds["test_size"] = d.test_size;
  if (d.kind == "blobs") {
    ds["dim"] = d.dim;
    ds["class_count"] = d.class_count;
    ds["separation"] = d.separation;
  } else if (d.kind == "idx") {
    ds["train_images"] = d.train_images;
    ds["train_labels"] = d.train_labels;
    ds["test_images"] = d.test_images;
    ds["test_labels"] = d.test_labels;
  } else {
    ds["path"] = d.path;
    ds["delimiter"] = d.delimiter;
    ds["label_column"] = d.label_column;
    ds["has_header"] = d.has_header;
  }
  j["partition"] = {{"mode", data::ToString(cfg.partition.mode)},
                    {"participants", cfg.partition.participants},
                    {"shards_per_participant",
                     cfg.partition.shards_per_participant}};
  const auto& c = cfg.corruption;
  json& cj = j["corruption"];
  cj["kind"] = data::ToString(c.kind);
  if (c.affected_count > 0) {
    cj["affected_count"] = c.affected_count;
  } else {
    cj["affected"] = c.affected;
  }
  cj["flip_ratio"] = c.flip_ratio;
  cj["trigger_features"] = c.trigger_features;
  cj["trigger_value"] = c.trigger_value;
  cj["target_label"] = c.target_label;
  cj["mix_per_batch"] = c.mix_per_batch;
  cj["batch_size"] = c.batch_size;
  cj["relabel"] = c.relabel;
  const auto& t = cfg.training;
  j["training"] = {{"rounds", t.rounds},
                   {"participant_fraction", t.participant_fraction},
                   {"local_epochs", t.local_epochs},
                   {"batch_size", t.batch_size},
                   {"learning_rate", t.learning_rate},
                   {"lr_decay", t.lr_decay},
                   {"model", fl::ToString(t.model)},
                   {"hidden", t.hidden},
                   {"metric", fl::ToString(t.metric)}};
  const auto& v = cfg.valuation;
  json& vj = j["valuation"];
  vj["method"] = fl::ToString(v.method);
  vj["normalized"] = v.normalized;
  vj["enumeration_cap"] = v.enumeration_cap;
  vj["verbose"] = v.verbose;
  if (v.approx) {
    vj["approx"] = {{"epsilon", v.approx->epsilon},
                    {"delta", v.approx->delta},
                    {"range_bound", v.approx->range_bound},
                    {"c_eps", v.approx->c_eps},
                    {"c_delta", v.approx->c_delta}};
  }
  j["experiment"] = {{"seeds", cfg.experiment.seeds},
                     {"dismiss_fractions", cfg.experiment.dismiss_fractions},
                     {"random_repeats", cfg.experiment.random_repeats}};
  j["output"] = cfg.output_directory;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

ResolvedSeeds ResolveSeeds(std::uint64_t master) {
  ResolvedSeeds s;
  s.master = master;
  s.dataset = DeriveSeed(master, "dataset");
  s.partition = DeriveSeed(master, "partition");
  s.corruption = DeriveSeed(master, "corruption");
  s.training = DeriveSeed(master, "training");
  s.valuation = DeriveSeed(master, "valuation");
  s.baseline = DeriveSeed(master, "baseline");
  return s;
}

estimators::ApproxParams EffectiveApprox(const ValuationConfig& v) {
  return v.approx.value_or(estimators::ApproxParams{});
}

fl::ValuationSettings MakeValuationSettings(const ExperimentConfig& cfg,
                                            const ResolvedSeeds& seeds) {
  fl::ValuationSettings s;
  s.method = cfg.valuation.method;
  s.approx = EffectiveApprox(cfg.valuation);
  s.enumeration_cap = cfg.valuation.enumeration_cap;
  s.threads = cfg.threads;
  s.seed = seeds.valuation;
  return s;
}

}  // namespace fedsv::config
