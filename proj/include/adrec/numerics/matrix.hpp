#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace adrec::num {

/// Dense row-major matrix of 64-bit reals. The only tensor type in the
/// engine; vectors are n x 1 (column) or 1 x n (row) matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 0.0); }
  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double* row(std::size_t r) { return values_.data() + r * cols_; }
  const double* row(std::size_t r) const { return values_.data() + r * cols_; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;
  void fill(double v);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> values_;
};

enum class Activation { Sigmoid, Relu, LeakyRelu, SoftmaxRows };

inline constexpr double kLeakySlope = 0.2;

/// out = X * W + b (b broadcast over rows). Throws shape_error on
/// dimension mismatch.
Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// Elementwise activation; SoftmaxRows normalizes each row (with row-max
/// subtraction for overflow safety).
Matrix activate(const Matrix& x, Activation kind);

double sigmoid(double x);

}  // namespace adrec::num
