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

#include "fedsv/config/manifest.h"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fedsv/common/errors.h"
#include "json.hpp"

namespace fedsv::config {

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string DigestFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("/", "cannot read config file " + path);
  const std::string bytes{std::istreambuf_iterator<char>(in), {}};
  return Sha256Hex(bytes);
}

std::string NowTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string ManifestToJson(const RunManifest& m) {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["command"] = m.command;
  j["config_path"] = m.config_path;
  j["config_digest"] = m.config_digest;
  j["seeds"] = {{"master", m.seeds.master},
                {"dataset", m.seeds.dataset},
                {"partition", m.seeds.partition},
                {"corruption", m.seeds.corruption},
                {"training", m.seeds.training},
                {"valuation", m.seeds.valuation},
                {"baseline", m.seeds.baseline}};
  j["experiment_seeds"] = m.experiment_seeds;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["status"] = m.status;
  if (!m.error.empty()) j["error"] = m.error;
  j["defaulted"] = m.defaulted;
  nlohmann::json rounds = nlohmann::json::array();
  for (std::size_t t = 0; t < m.per_round.size(); ++t) {
    const auto& d = m.per_round[t];
    rounds.push_back({{"round", t},
                      {"permutation_samples", d.permutation_samples},
                      {"t1", d.t1},
                      {"t2", d.t2},
                      {"utility_evaluations", d.utility_evaluations}});
  }
  j["per_round_counts"] = rounds;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

void WriteFileAtomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw FormatError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fedsv::config
