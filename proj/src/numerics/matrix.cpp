#include "adrec/numerics/matrix.hpp"

#include <cmath>
#include <utility>

#include "adrec/error.hpp"

namespace adrec::num {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) throw shape_error("from_rows: value count does not match shape");
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.values_ = std::move(values);
  return m;
}

bool Matrix::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Matrix::fill(double v) {
  for (auto& x : values_) x = v;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw shape_error("matmul: inner dimensions disagree");
  Matrix out(a.rows(), b.cols(), 0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < n; ++i) {
    double* out_row = out.row(i);
    const double* a_row = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double aik = a_row[p];
      if (aik == 0.0) continue;
      const double* b_row = b.row(p);
      for (std::size_t j = 0; j < m; ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
  if (x.cols() != w.rows()) throw shape_error("affine: inner dimensions disagree");
  if (!b.empty() && b.size() != w.cols()) throw shape_error("affine: bias length does not match output width");
  Matrix out = matmul(x, w);
  if (!b.empty()) {
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double* r = out.row(i);
      for (std::size_t j = 0; j < out.cols(); ++j) r[j] += b[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix activate(const Matrix& x, Activation kind) {
  Matrix out = x;
  switch (kind) {
    case Activation::Sigmoid:
      for (auto& v : out.values()) v = sigmoid(v);
      break;
    case Activation::Relu:
      for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::LeakyRelu:
      for (auto& v : out.values()) v = v > 0.0 ? v : kLeakySlope * v;
      break;
    case Activation::SoftmaxRows: {
      if (out.cols() < 1) throw shape_error("softmax_rows: needs at least one column");
      for (std::size_t i = 0; i < out.rows(); ++i) {
        double* r = out.row(i);
        double mx = r[0];
        for (std::size_t j = 1; j < out.cols(); ++j) mx = std::max(mx, r[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < out.cols(); ++j) {
          r[j] = std::exp(r[j] - mx);
          sum += r[j];
        }
        for (std::size_t j = 0; j < out.cols(); ++j) r[j] /= sum;
      }
      break;
    }
  }
  return out;
}

}  // namespace adrec::num
