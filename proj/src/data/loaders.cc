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

#include "fedsv/data/loaders.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "fedsv/common/errors.h"

namespace fedsv::data {
namespace {

std::vector<std::uint8_t> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, const char* what)
      : bytes_(bytes), what_(what) {}

  std::uint32_t BigEndian32() {
    Need(4);
    const std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 24) |
                            (std::uint32_t{bytes_[pos_ + 1]} << 16) |
                            (std::uint32_t{bytes_[pos_ + 2]} << 8) |
                            std::uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  std::span<const std::uint8_t> Take(std::size_t n) {
    Need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t pos() const { return pos_; }

  [[noreturn]] void Fail(const std::string& message, std::size_t offset) const {
    throw FormatError(std::string(what_) + " file, byte offset " +
                      std::to_string(offset) + ": " + message);
  }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      Fail("truncated, need " + std::to_string(n) + " more bytes but only " +
               std::to_string(bytes_.size() - pos_) + " remain",
           pos_);
    }
  }

  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

Dataset ParseIdx(std::span<const std::uint8_t> images,
                 std::span<const std::uint8_t> labels) {
  ByteReader img(images, "IDX images");
  const std::uint32_t img_magic = img.BigEndian32();
  if (img_magic != kIdxImagesMagic) img.Fail("bad magic number", 0);
  const std::uint32_t n = img.BigEndian32();
  const std::uint32_t rows = img.BigEndian32();
  const std::uint32_t cols = img.BigEndian32();
  if (rows == 0 || cols == 0) img.Fail("zero image dimension", 8);

  ByteReader lab(labels, "IDX labels");
  const std::uint32_t lab_magic = lab.BigEndian32();
  if (lab_magic != kIdxLabelsMagic) lab.Fail("bad magic number", 0);
  const std::uint32_t n_labels = lab.BigEndian32();
  if (n_labels != n) {
    lab.Fail("label count " + std::to_string(n_labels) +
                 " does not match image count " + std::to_string(n),
             4);
  }
  if (n == 0) img.Fail("no images", 4);

  const std::size_t pixels = std::size_t{rows} * cols;
  const auto pixel_bytes = img.Take(std::size_t{n} * pixels);
  const auto label_bytes = lab.Take(n);

  Dataset ds;
  ds.dim = static_cast<int>(pixels);
  ds.features.resize(pixel_bytes.size());
  std::transform(pixel_bytes.begin(), pixel_bytes.end(), ds.features.begin(),
                 [](std::uint8_t b) { return b / 255.0; });
  ds.labels.assign(label_bytes.begin(), label_bytes.end());
  ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  return ds;
}

Dataset LoadIdx(const std::string& images_path,
                const std::string& labels_path) {
  const auto images = ReadFile(images_path);
  const auto labels = ReadFile(labels_path);
  return ParseIdx(images, labels);
}

Dataset LoadDelimited(const std::string& path,
                      const DelimitedOptions& options) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  Dataset ds;
  std::string line;
  int line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && options.has_header) continue;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    int label = -1;
    int column = 0;
    while (std::getline(ss, cell, options.delimiter)) {
      try {
        std::size_t used = 0;
        if (column == options.label_column) {
          label = std::stoi(cell, &used);
        } else {
          row.push_back(std::stod(cell, &used));
        }
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": cannot parse column " + std::to_string(column) +
                          " ('" + cell + "')");
      }
      ++column;
    }
    if (label < 0) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": missing or negative label");
    }
    if (ds.dim == 0) ds.dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != ds.dim || ds.dim == 0) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(ds.dim) + " features");
    }
    ds.features.insert(ds.features.end(), row.begin(), row.end());
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (ds.labels.empty()) throw FormatError(path + ": no examples");
  ds.class_count = max_label + 1;
  return ds;
}

}  // namespace fedsv::data
