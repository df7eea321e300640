// Copyright 2026 The topodrift Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOPODRIFT_MATRIX_HPP_
#define TOPODRIFT_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "topodrift/error.hpp"

namespace topodrift {

// Dense row-major matrix of doubles. Samples are rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorCode::kDimensionMismatch,
            "matrix data size does not match rows*cols");
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(r);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  // The first appended row fixes the column count of an empty matrix.
  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    require(values.size() == cols_, ErrorCode::kDimensionMismatch,
            "row length does not match matrix column count");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  // Rows [begin, end) as a new matrix.
  Matrix slice_rows(std::size_t begin, std::size_t end) const {
    require(begin <= end && end <= rows_, ErrorCode::kInvalidArgument,
            "row slice out of range");
    return Matrix(end - begin, cols_,
                  std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                                      data_.begin() + static_cast<std::ptrdiff_t>(end * cols_)));
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace topodrift

#endif  // TOPODRIFT_MATRIX_HPP_
