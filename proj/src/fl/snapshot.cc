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

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "fedsv/common/errors.h"
#include "fedsv/fl/federated.h"

namespace fedsv::fl {
namespace {

constexpr char kMagic[8] = {'F', 'E', 'D', 'S', 'V', 'R', 'N', 'D'};
constexpr std::uint32_t kVersion = 1;

// Little-endian encoder.
class Writer {
 public:
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

  void Params(const ModelParams& p) {
    U32(static_cast<std::uint32_t>(p.layout.kind));
    I32(p.layout.input_dim);
    I32(p.layout.class_count);
    I32(p.layout.hidden);
    U64(p.theta.size());
    for (const double v : p.theta) F64(v);
  }

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint64_t Unsigned(int width) {
    Need(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_ + i])} << (8 * i);
    }
    pos_ += width;
    return v;
  }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Unsigned(4)); }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  std::uint64_t U64() { return Unsigned(8); }
  double F64() { return std::bit_cast<double>(U64()); }

  void Expect(const char* p, std::size_t n, const char* what) {
    Need(n);
    if (std::memcmp(bytes_.data() + pos_, p, n) != 0) Fail(what);
    pos_ += n;
  }

  ModelParams Params() {
    ModelParams p;
    const std::uint32_t kind = U32();
    if (kind > 1) Fail("unknown model kind");
    p.layout.kind = static_cast<ModelKind>(kind);
    p.layout.input_dim = I32();
    p.layout.class_count = I32();
    p.layout.hidden = I32();
    const std::uint64_t n = U64();
    if (n != p.layout.ParameterCount()) Fail("parameter count mismatch");
    Need(n * 8);
    p.theta.resize(n);
    for (auto& v : p.theta) v = F64();
    return p;
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

  [[noreturn]] void Fail(const std::string& what) const {
    throw FormatError(path_ + ": " + what + " at byte offset " +
                      std::to_string(pos_));
  }

 private:
  void Need(std::uint64_t n) const {
    if (bytes_.size() - pos_ < n) Fail("truncated snapshot");
  }

  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string RoundSnapshotName(int round) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "round_%04d.bin", round);
  return buf;
}

void WriteRoundSnapshot(const RoundRecord& round, const std::string& path) {
  Writer w;
  w.Raw(kMagic, sizeof(kMagic));
  w.U32(kVersion);
  w.I32(round.round_index);
  w.U32(static_cast<std::uint32_t>(round.selected.size()));
  for (const ParticipantId id : round.selected) w.I32(id);
  w.Params(round.global_before);
  w.U32(static_cast<std::uint32_t>(round.updates.size()));
  for (const auto& u : round.updates) {
    w.I32(u.participant_id);
    w.I32(u.round_index);
    w.Params(u.updated_params);
  }
  w.Params(round.global_after);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp);
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw FormatError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

RoundRecord ReadRoundSnapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}), path);
  r.Expect(kMagic, sizeof(kMagic), "bad magic header");
  const std::uint32_t version = r.U32();
  if (version != kVersion) {
    r.Fail("unsupported snapshot version " + std::to_string(version));
  }
  RoundRecord round;
  round.round_index = r.I32();
  const std::uint32_t selected = r.U32();
  std::vector<ParticipantId> ids(selected);
  for (auto& id : ids) id = r.I32();
  round.selected = Coalition(std::move(ids));
  round.global_before = r.Params();
  const std::uint32_t updates = r.U32();
  if (updates != selected) r.Fail("update count does not match selection");
  round.updates.resize(updates);
  for (auto& u : round.updates) {
    u.participant_id = r.I32();
    u.round_index = r.I32();
    u.updated_params = r.Params();
    if (!(u.updated_params.layout == round.global_before.layout)) {
      r.Fail("update layout differs from the global model");
    }
  }
  round.global_after = r.Params();
  if (!r.AtEnd()) r.Fail("trailing bytes");
  return round;
}

std::vector<RoundRecord> LoadRoundSnapshots(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) {
    throw FormatError("snapshot directory " + directory + " does not exist");
  }
  std::vector<RoundRecord> rounds;
  for (int t = 0;; ++t) {
    const fs::path p = fs::path(directory) / RoundSnapshotName(t);
    if (!fs::exists(p)) break;
    rounds.push_back(ReadRoundSnapshot(p.string()));
    if (rounds.back().round_index != t) {
      throw FormatError(p.string() + ": round index does not match file name");
    }
  }
  if (rounds.empty()) {
    throw FormatError("snapshot directory " + directory + " holds no rounds");
  }
  return rounds;
}

}  // namespace fedsv::fl
