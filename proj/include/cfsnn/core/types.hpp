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

#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "cfsnn/core/error.hpp"

namespace cfsnn {

#ifdef CFSNN_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

inline constexpr std::size_t kMaxRank = 4;

// Dense row-major extents, rank 0..4. Rank 0 is a scalar with one element.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::span<const std::size_t> dims);

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t i) const { return dims_[i]; }
  std::size_t& operator[](std::size_t i) { return dims_[i]; }
  std::size_t numel() const;
  std::vector<std::size_t> dims() const {
    return {dims_.begin(), dims_.begin() + rank_};
  }

  // Extents with the leading axis replaced.
  Shape with_leading(std::size_t n) const;
  // Extents without the leading axis.
  Shape tail() const;
  // Prepends an axis; rank must stay <= 4.
  Shape prepend(std::size_t n) const;

  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) {
    if (a.rank_ != b.rank_) return false;
    for (std::size_t i = 0; i < a.rank_; ++i)
      if (a.dims_[i] != b.dims_[i]) return false;
    return true;
  }

 private:
  std::array<std::size_t, kMaxRank> dims_{};
  std::size_t rank_ = 0;
};

}  // namespace cfsnn
