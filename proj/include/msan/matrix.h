//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_MATRIX_H_
#define MSAN_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace msan {

// Dense row-major matrix of doubles. The value type behind every tensor,
// feature matrix and parameter in the project.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) { }
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix row_vector(std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return { data_.data() + r * cols_, cols_ };
  }
  std::span<const double> row(std::size_t r) const {
    return { data_.data() + r * cols_, cols_ };
  }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  void fill(double value);

  Matrix transpose() const;

  bool same_shape(const Matrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix &, const Matrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a * b. Throws ShapeMismatch on inner-dimension disagreement.
Matrix matmul(const Matrix &a, const Matrix &b);

double max_abs_diff(const Matrix &a, const Matrix &b);

}  // namespace msan

#endif  // MSAN_MATRIX_H_
