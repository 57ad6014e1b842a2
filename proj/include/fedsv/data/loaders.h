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

#ifndef FEDSV_DATA_LOADERS_H_
#define FEDSV_DATA_LOADERS_H_

#include <cstdint>
#include <span>
#include <string>

#include "fedsv/data/dataset.h"

namespace fedsv::data {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Reads an IDX image file (unsigned byte, 3 dims) and its IDX label file.
// Pixels are scaled to [0, 1]; class_count is max label + 1. Throws
// FormatError with the failing byte offset on bad magic, truncation or a
// count mismatch.
Dataset LoadIdx(const std::string& images_path, const std::string& labels_path);

Dataset ParseIdx(std::span<const std::uint8_t> images,
                 std::span<const std::uint8_t> labels);

struct DelimitedOptions {
  char delimiter = ',';
  int label_column = 0;
  bool has_header = false;
};

// Tabular text: one example per line, integer label in `label_column`, every
// other column a real feature.
Dataset LoadDelimited(const std::string& path,
                      const DelimitedOptions& options = {});

}  // namespace fedsv::data

#endif  // FEDSV_DATA_LOADERS_H_
