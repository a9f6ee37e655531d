//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/matrix.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "msan/error.h"

namespace msan {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw Error(ErrorCode::kShapeMismatch,
                "matrix data length " + std::to_string(data_.size())
                    + " does not match " + std::to_string(rows) + "x"
                    + std::to_string(cols));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    m(i, i) = 1.0;
  return m;
}

Matrix Matrix::row_vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Matrix(1, n, std::move(values));
}

void Matrix::fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      t(c, r) = (*this)(r, c);
  return t;
}

Matrix matmul(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "matmul: " + std::to_string(a.rows()) + "x"
                    + std::to_string(a.cols()) + " * "
                    + std::to_string(b.rows()) + "x"
                    + std::to_string(b.cols()));
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0)
        continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j)
        orow[j] += aik * brow[j];
    }
  }
  return out;
}

double max_abs_diff(const Matrix &a, const Matrix &b) {
  if (!a.same_shape(b))
    throw Error(ErrorCode::kShapeMismatch, "max_abs_diff: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace msan
