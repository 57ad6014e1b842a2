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

#ifndef FEDSV_CONFIG_MANIFEST_H_
#define FEDSV_CONFIG_MANIFEST_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fedsv/config/experiment_config.h"
#include "fedsv/estimators/estimators.h"

namespace fedsv::config {

inline constexpr std::string_view kVersion = "fedsv 0.1.0";

// Provenance of one CLI run. Timestamps live only here so result tables stay
// byte-identical across reruns.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_digest;  // SHA-256 of the config file bytes
  ResolvedSeeds seeds;
  std::vector<std::uint64_t> experiment_seeds;
  std::string started_at;
  std::string finished_at;
  // "complete", "partial" or "failed".
  std::string status = "complete";
  std::string error;
  std::vector<std::string> defaulted;
  std::vector<estimators::EstimatorDiagnostics> per_round;
  std::vector<std::string> outputs;
};

std::string Sha256Hex(std::string_view bytes);
// Throws ConfigError when the file cannot be read.
std::string DigestFile(const std::string& path);

// UTC, ISO 8601.
std::string NowTimestamp();

std::string ManifestToJson(const RunManifest& manifest);

// Writes to a temporary file in the same directory and renames it over `path`.
void WriteFileAtomic(const std::string& path, std::string_view contents);

}  // namespace fedsv::config

#endif  // FEDSV_CONFIG_MANIFEST_H_
