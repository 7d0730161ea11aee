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

#include <sstream>

#include "cfsnn/core/types.hpp"

namespace cfsnn {

Shape::Shape(std::initializer_list<std::size_t> dims)
    : Shape(std::span<const std::size_t>(dims.begin(), dims.size())) {}

Shape::Shape(std::span<const std::size_t> dims) {
  if (dims.size() > kMaxRank)
    throw ShapeError("rank " + std::to_string(dims.size()) +
                     " exceeds the maximum of 4");
  rank_ = dims.size();
  for (std::size_t i = 0; i < rank_; ++i) {
    if (dims[i] == 0) throw ShapeError("zero extent in shape");
    dims_[i] = dims[i];
  }
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

Shape Shape::with_leading(std::size_t n) const {
  if (rank_ == 0) throw ShapeError("scalar shape has no leading axis");
  Shape s = *this;
  s.dims_[0] = n;
  return s;
}

Shape Shape::tail() const {
  if (rank_ == 0) throw ShapeError("scalar shape has no leading axis");
  Shape s;
  s.rank_ = rank_ - 1;
  for (std::size_t i = 1; i < rank_; ++i) s.dims_[i - 1] = dims_[i];
  return s;
}

Shape Shape::prepend(std::size_t n) const {
  if (rank_ == kMaxRank) throw ShapeError("cannot prepend to a rank-4 shape");
  Shape s;
  s.rank_ = rank_ + 1;
  s.dims_[0] = n;
  for (std::size_t i = 0; i < rank_; ++i) s.dims_[i + 1] = dims_[i];
  return s;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) os << ", ";
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace cfsnn
