// Copyright 2026 The cfsnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cfsnn/data/dataset.hpp"

namespace cfsnn::data {

void Dataset::validate() const {
  if (classes == 0) throw Error("dataset: class count is zero");
  if (features.size() != labels.size() * sample_numel())
    throw ShapeError("dataset: " + std::to_string(features.size()) +
                     " feature values for " + std::to_string(labels.size()) +
                     " samples of shape " + sample_shape.str());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= classes)
      throw Error("dataset: label " + std::to_string(labels[i]) + " of sample " +
                  std::to_string(i) + " is not below the class count " +
                  std::to_string(classes));
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void put_be32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v >> 24),
                                 static_cast<char>(v >> 16),
                                 static_cast<char>(v >> 8), static_cast<char>(v)};
  os.write(b.data(), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t classes, const std::string& split) {
  const auto img = slurp(images_path);
  const auto lab = slurp(labels_path);
  if (img.size() < 16)
    throw FormatError(images_path + ": truncated IDX header (" +
                      std::to_string(img.size()) + " bytes)");
  if (be32(img, 0) != kImagesMagic)
    throw FormatError(images_path + ": bad IDX image magic, expected " +
                      hex(kImagesMagic) + ", found " + hex(be32(img, 0)));
  if (lab.size() < 8)
    throw FormatError(labels_path + ": truncated IDX header (" +
                      std::to_string(lab.size()) + " bytes)");
  if (be32(lab, 0) != kLabelsMagic)
    throw FormatError(labels_path + ": bad IDX label magic, expected " +
                      hex(kLabelsMagic) + ", found " + hex(be32(lab, 0)));

  const std::size_t n = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
  const std::size_t nl = be32(lab, 4);
  if (n != nl)
    throw FormatError("IDX count mismatch: " + images_path + " holds " +
                      std::to_string(n) + " images, " + labels_path + " holds " +
                      std::to_string(nl) + " labels");
  if (rows == 0 || cols == 0)
    throw FormatError(images_path + ": zero image extent");
  const std::size_t pixels = rows * cols;
  if (img.size() < 16 + n * pixels)
    throw FormatError(images_path + ": truncated payload, expected " +
                      std::to_string(n * pixels) + " pixel bytes, found " +
                      std::to_string(img.size() - 16));
  if (lab.size() < 8 + n)
    throw FormatError(labels_path + ": truncated payload, expected " +
                      std::to_string(n) + " label bytes, found " +
                      std::to_string(lab.size() - 8));

  Dataset ds;
  ds.sample_shape = Shape{1, rows, cols};
  ds.classes = classes;
  ds.split = split;
  ds.bounded = true;
  ds.lo = 0;
  ds.hi = 1;
  ds.features.resize(n * pixels);
  for (std::size_t i = 0; i < n * pixels; ++i)
    ds.features[i] = static_cast<real>(img[16 + i]) / real(255);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = lab[8 + i];
  ds.validate();
  return ds;
}

void write_idx(const Dataset& ds, const std::string& images_path,
               const std::string& labels_path) {
  if (ds.sample_shape.rank() != 3 || ds.sample_shape[0] != 1)
    throw ShapeError("write_idx: samples must be [1, rows, cols], got " +
                     ds.sample_shape.str());
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img) throw IoError("cannot write '" + images_path + "'");
  if (!lab) throw IoError("cannot write '" + labels_path + "'");
  const auto n = static_cast<std::uint32_t>(ds.size());
  put_be32(img, kImagesMagic);
  put_be32(img, n);
  put_be32(img, static_cast<std::uint32_t>(ds.sample_shape[1]));
  put_be32(img, static_cast<std::uint32_t>(ds.sample_shape[2]));
  for (real v : ds.features) {
    const long b = std::lround(std::clamp<real>(v, 0, 1) * 255);
    img.put(static_cast<char>(b));
  }
  put_be32(lab, kLabelsMagic);
  put_be32(lab, n);
  for (auto l : ds.labels) lab.put(static_cast<char>(l));
  if (!img || !lab) throw IoError("write_idx: write failed");
}

Dataset load_csv(const std::string& path, std::size_t classes,
                 const std::string& split) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty CSV file");
  const std::size_t columns =
      static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2)
    throw FormatError(path + ": need at least one feature and a label column");

  Dataset ds;
  ds.sample_shape = Shape{columns - 1};
  ds.split = split;
  std::size_t max_label = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        if (col + 1 < columns) {
          ds.features.push_back(static_cast<real>(std::stod(cell, &used)));
        } else {
          const long long v = std::stoll(cell, &used);
          if (v < 0) throw std::invalid_argument("negative");
          ds.labels.push_back(static_cast<std::size_t>(v));
          max_label = std::max(max_label, ds.labels.back());
        }
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(lineno) + ": bad value '" +
                          cell + "' in column " + std::to_string(col + 1));
      }
      ++col;
    }
    if (col != columns)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(columns) + " columns, found " +
                        std::to_string(col));
  }
  if (ds.labels.empty()) throw FormatError(path + ": no data rows");
  ds.classes = classes ? classes : max_label + 1;
  ds.validate();
  return ds;
}

}  // namespace cfsnn::data
