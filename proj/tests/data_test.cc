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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "fedsv/common/errors.h"
#include "fedsv/data/corruption.h"
#include "fedsv/data/dataset.h"
#include "fedsv/data/loaders.h"
#include "fedsv/data/partition.h"
#include "gtest/gtest.h"

namespace fedsv::data {
namespace {

Dataset Labelled(std::vector<int> labels, int class_count) {
  Dataset ds;
  ds.dim = 1;
  ds.class_count = class_count;
  for (std::size_t i = 0; i < labels.size(); ++i) ds.features.push_back(double(i));
  ds.labels = std::move(labels);
  return ds;
}

Dataset Balanced(std::size_t n, int class_count) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % class_count);
  return Labelled(std::move(labels), class_count);
}

TEST(BlobsTest, DeterministicAndBalanced) {
  BlobSpec spec;
  spec.n = 1003;
  spec.seed = 5;
  const Dataset a = SynthBlobs(spec);
  EXPECT_EQ(a, SynthBlobs(spec));
  a.Validate();
  const auto hist = ClassHistogram(a);
  ASSERT_EQ(hist.size(), 5u);
  for (const std::size_t h : hist) EXPECT_LE(h - 200, 1u);
  spec.seed = 6;
  EXPECT_NE(a, SynthBlobs(spec));
}

TEST(BlobsTest, WideSeparationIsNearlySeparable) {
  BlobSpec spec;
  spec.n = 500;
  spec.separation = 50.0;
  spec.seed = 1;
  const Dataset ds = SynthBlobs(spec);
  // Nearest-center classification with centers estimated from the data.
  std::vector<std::vector<double>> center(spec.class_count, std::vector<double>(spec.dim, 0.0));
  const auto hist = ClassHistogram(ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (int f = 0; f < ds.dim; ++f) center[ds.labels[i]][f] += ds.row(i)[f] / hist[ds.labels[i]];
  }
  int correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < spec.class_count; ++c) {
      double d = 0;
      for (int f = 0; f < ds.dim; ++f) d += std::pow(ds.row(i)[f] - center[c][f], 2);
      if (d < best_d) best_d = d, best = c;
    }
    correct += best == ds.labels[i];
  }
  EXPECT_EQ(correct, static_cast<int>(ds.size()));
}

void PutBe32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

struct IdxFiles {
  std::vector<std::uint8_t> images, labels;
};

IdxFiles MakeIdx(std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
  IdxFiles f;
  PutBe32(f.images, 0x803);
  PutBe32(f.images, n);
  PutBe32(f.images, rows);
  PutBe32(f.images, cols);
  for (std::uint32_t i = 0; i < n * rows * cols; ++i) {
    f.images.push_back(static_cast<std::uint8_t>((i * 37 + 11) % 256));
  }
  PutBe32(f.labels, 0x801);
  PutBe32(f.labels, n);
  for (std::uint32_t i = 0; i < n; ++i) f.labels.push_back(static_cast<std::uint8_t>((i * 3) % 10));
  return f;
}

// Reference reader: walks the byte layout by hand.
double ReferenceFirstImageSum(const std::vector<std::uint8_t>& bytes) {
  const auto be = [&](std::size_t o) {
    return (std::uint32_t(bytes[o]) << 24) | (std::uint32_t(bytes[o + 1]) << 16) |
           (std::uint32_t(bytes[o + 2]) << 8) | std::uint32_t(bytes[o + 3]);
  };
  const std::size_t pixels = std::size_t(be(8)) * be(12);
  double sum = 0;
  for (std::size_t i = 0; i < pixels; ++i) sum += bytes[16 + i] / 255.0;
  return sum;
}

TEST(IdxTest, MatchesReferenceReader) {
  const IdxFiles f = MakeIdx(7, 4, 3);
  const Dataset ds = ParseIdx(f.images, f.labels);
  ASSERT_EQ(ds.size(), 7u);
  EXPECT_EQ(ds.dim, 12);
  EXPECT_EQ(ds.class_count, 10);
  double sum = 0;
  for (const double x : ds.row(0)) sum += x;
  EXPECT_NEAR(sum, ReferenceFirstImageSum(f.images), 1e-12);
  EXPECT_EQ(ds.labels[3], 9);
}

TEST(IdxTest, RejectsMalformedFiles) {
  const IdxFiles f = MakeIdx(5, 2, 2);
  std::vector<std::uint8_t> header_only(f.images.begin(), f.images.begin() + 16);
  EXPECT_THROW(ParseIdx(header_only, f.labels), FormatError);
  const IdxFiles g = MakeIdx(4, 2, 2);
  EXPECT_THROW(ParseIdx(f.images, g.labels), FormatError);
  std::vector<std::uint8_t> bad_magic = f.images;
  bad_magic[3] = 0x01;
  EXPECT_THROW(ParseIdx(bad_magic, f.labels), FormatError);
}

TEST(IdxTest, LoadsFromFiles) {
  const IdxFiles f = MakeIdx(3, 2, 2);
  const auto dir = std::filesystem::temp_directory_path() / "fedsv_idx_test";
  std::filesystem::create_directories(dir);
  std::ofstream((dir / "img").string(), std::ios::binary)
      .write(reinterpret_cast<const char*>(f.images.data()), f.images.size());
  std::ofstream((dir / "lab").string(), std::ios::binary)
      .write(reinterpret_cast<const char*>(f.labels.data()), f.labels.size());
  EXPECT_EQ(LoadIdx((dir / "img").string(), (dir / "lab").string()),
            ParseIdx(f.images, f.labels));
  EXPECT_THROW(LoadIdx((dir / "missing").string(), (dir / "lab").string()), Error);
}

TEST(DelimitedTest, ParsesLabelColumn) {
  const auto path = std::filesystem::temp_directory_path() / "fedsv_csv_test.csv";
  std::ofstream(path.string()) << "a;y;b\n0.5;1;2\n-1;0;3.25\n";
  DelimitedOptions o;
  o.delimiter = ';';
  o.label_column = 1;
  o.has_header = true;
  const Dataset ds = LoadDelimited(path.string(), o);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.dim, 2);
  EXPECT_EQ(ds.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(ds.features, (std::vector<double>{0.5, 2, -1, 3.25}));
  std::ofstream(path.string()) << "1,2\n3\n";
  EXPECT_THROW(LoadDelimited(path.string()), FormatError);
}

TEST(PartitionTest, IidSizes) {
  const Dataset ds = Balanced(60000, 10);
  const PartitionPlan plan = PartitionIid(ds, 100, 3);
  for (const auto& shard : plan.assignment) EXPECT_EQ(shard.size(), 600u);
  ValidatePartition(plan, ds.size());
  const PartitionPlan one = PartitionIid(ds, 1, 3);
  EXPECT_EQ(one.assignment[0].size(), ds.size());
  const PartitionPlan uneven = PartitionIid(Balanced(103, 3), 10, 3);
  for (const auto& shard : uneven.assignment) {
    EXPECT_GE(shard.size(), 10u);
    EXPECT_LE(shard.size(), 11u);
  }
}

TEST(PartitionTest, ShardNonIid) {
  const Dataset ds = Balanced(60000, 10);
  const PartitionPlan plan = PartitionNonIidShards(ds, 100, 200, 2, 4);
  ValidatePartition(plan, ds.size());
  for (const auto& shard : plan.assignment) {
    EXPECT_EQ(shard.size(), 600u);
    std::set<int> classes;
    for (const std::size_t i : shard) classes.insert(ds.labels[i]);
    // Each 300-row shard of label-sorted data spans at most 2 classes.
    EXPECT_LE(classes.size(), 2u);
  }
  EXPECT_LT(MeanLabelEntropy(ds, plan), MeanLabelEntropy(ds, PartitionIid(ds, 100, 4)));
  EXPECT_THROW(PartitionNonIidShards(ds, 100, 200, 3, 4), ParameterError);
}

TEST(PartitionTest, CoverAndRoundTrip) {
  const Dataset ds = Balanced(240, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ValidatePartition(PartitionIid(ds, 7, seed), ds.size());
    const PartitionPlan p = PartitionNonIidShards(ds, 6, 12, 2, seed);
    ValidatePartition(p, ds.size());
    EXPECT_EQ(PartitionFromJson(PartitionToJson(p)), p);
  }
  PartitionPlan broken = PartitionIid(ds, 3, 1);
  broken.assignment[0].push_back(broken.assignment[1].front());
  EXPECT_THROW(ValidatePartition(broken, ds.size()), ParameterError);
}

TEST(LabelFlipTest, CountsAndUntouchedShards) {
  const Dataset ds = Balanced(400, 5);
  const PartitionPlan plan = PartitionIid(ds, 8, 2);
  CorruptionSpec spec;
  spec.kind = CorruptionKind::kLabelFlip;
  spec.affected = {1, 4};
  spec.flip_ratio = 0.3;
  spec.seed = 9;
  const Dataset flipped = FlipLabels(ds, plan, spec);
  for (int p = 0; p < 8; ++p) {
    std::size_t changed = 0;
    for (const std::size_t i : plan.assignment[p]) {
      changed += flipped.labels[i] != ds.labels[i];
      EXPECT_EQ(flipped.row(i)[0], ds.row(i)[0]);
    }
    const bool affected = p == 1 || p == 4;
    EXPECT_EQ(changed, affected ? static_cast<std::size_t>(0.3 * 50) : 0u);
  }
}

TEST(LabelFlipTest, BinaryFlipIsComplement) {
  const Dataset ds = Balanced(40, 2);
  const PartitionPlan plan = PartitionIid(ds, 2, 2);
  CorruptionSpec spec;
  spec.kind = CorruptionKind::kLabelFlip;
  spec.affected = {0};
  spec.flip_ratio = 1.0;
  const Dataset flipped = FlipLabels(ds, plan, spec);
  for (const std::size_t i : plan.assignment[0]) EXPECT_EQ(flipped.labels[i], 1 - ds.labels[i]);
}

TEST(BackdoorTest, QuotaArithmetic) {
  EXPECT_EQ(BackdoorQuota(64, 20, 64), 20u);
  EXPECT_EQ(BackdoorQuota(32, 20, 64), 10u);
  EXPECT_EQ(BackdoorQuota(3, 20, 64), 0u);
}

TEST(BackdoorTest, EmptyTriggerOnlyRelabels) {
  BlobSpec bs;
  bs.n = 300;
  bs.seed = 2;
  const Dataset ds = SynthBlobs(bs);
  const Dataset test = SynthBlobs(BlobSpec{100, 10, 5, 3.0, 3});
  const PartitionPlan plan = PartitionIid(ds, 3, 1);
  CorruptionSpec spec;
  spec.kind = CorruptionKind::kBackdoor;
  spec.affected = {2};
  spec.target_label = 4;
  const BackdoorData b = ImplantBackdoor(ds, plan, spec, test);
  EXPECT_EQ(b.poisoned.features, ds.features);
  std::size_t relabelled = 0;
  for (const std::size_t i : plan.assignment[2]) {
    relabelled += b.poisoned.labels[i] == 4;
  }
  // 100 rows: one full batch of 64 and a tail of 36.
  std::size_t originally = 0;
  for (const std::size_t i : plan.assignment[2]) originally += ds.labels[i] == 4;
  EXPECT_LE(relabelled, originally + 20 + 11);
  EXPECT_GE(relabelled, 20u + 11u);
  for (int p = 0; p < 2; ++p) {
    for (const std::size_t i : plan.assignment[p]) EXPECT_EQ(b.poisoned.labels[i], ds.labels[i]);
  }
}

TEST(BackdoorTest, TriggeredTestSet) {
  const Dataset ds = SynthBlobs(BlobSpec{200, 10, 5, 3.0, 2});
  const Dataset test = SynthBlobs(BlobSpec{100, 10, 5, 3.0, 3});
  CorruptionSpec spec;
  spec.kind = CorruptionKind::kBackdoor;
  spec.affected = {0};
  spec.trigger_features = {0, 3};
  spec.trigger_value = 5.0;
  spec.target_label = 1;
  const BackdoorData b = ImplantBackdoor(ds, PartitionIid(ds, 2, 1), spec, test);
  EXPECT_EQ(b.triggered_test.size(), 80u);
  for (std::size_t i = 0; i < b.triggered_test.size(); ++i) {
    EXPECT_EQ(b.triggered_test.labels[i], 1);
    EXPECT_EQ(b.triggered_test.row(i)[0], 5.0);
    EXPECT_EQ(b.triggered_test.row(i)[3], 5.0);
  }
  spec.trigger_features = {10};
  EXPECT_THROW(ImplantBackdoor(ds, PartitionIid(ds, 2, 1), spec, test), ParameterError);
}

}  // namespace
}  // namespace fedsv::data
