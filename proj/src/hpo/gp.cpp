#include "adrec/hpo/gp.hpp"

#include <cmath>

#include "adrec/error.hpp"

namespace adrec::hpo {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

double GpSurrogate::kernel(const std::array<double, 4>& a, const std::array<double, 4>& b) const {
  double d2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return signal_variance_ * std::exp(-d2 / (2.0 * length_scale_ * length_scale_));
}

void GpSurrogate::fit(const std::vector<std::array<double, 4>>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw shape_error("gp fit: point/value count mismatch");
  if (x.size() < 2) throw input_error("gp fit: needs at least 2 observations");
  const std::size_t n = x.size();
  x_ = x;
  y_mean_ = 0.0;
  for (double v : y) y_mean_ += v;
  y_mean_ /= static_cast<double>(n);

  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      k[i][j] = k[j][i] = kernel(x[i], x[j]) + (i == j ? noise_ : 0.0);
    }

  // Cholesky K = L L^T.
  l_.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = k[i][j];
      for (std::size_t p = 0; p < j; ++p) s -= l_[i][p] * l_[j][p];
      if (i == j) {
        if (s <= 0.0) throw numeric_error("gp fit: kernel matrix not positive definite");
        l_[i][i] = std::sqrt(s);
      } else {
        l_[i][j] = s / l_[j][j];
      }
    }
  }

  // alpha = K^-1 (y - mean) by forward/back substitution.
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i] - y_mean_;
    for (std::size_t p = 0; p < i; ++p) s -= l_[i][p] * z[p];
    z[i] = s / l_[i][i];
  }
  alpha_.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t p = ii + 1; p < n; ++p) s -= l_[p][ii] * alpha_[p];
    alpha_[ii] = s / l_[ii][ii];
  }
}

GpSurrogate::Posterior GpSurrogate::predict(const std::array<double, 4>& x) const {
  if (!fitted()) throw input_error("gp predict: surrogate not fitted");
  const std::size_t n = x_.size();
  std::vector<double> kstar(n);
  for (std::size_t i = 0; i < n; ++i) kstar[i] = kernel(x, x_[i]);

  double mean = y_mean_;
  for (std::size_t i = 0; i < n; ++i) mean += kstar[i] * alpha_[i];

  // v = L^-1 k*; var = k(x,x) - v^T v.
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = kstar[i];
    for (std::size_t p = 0; p < i; ++p) s -= l_[i][p] * v[p];
    v[i] = s / l_[i][i];
  }
  double var = kernel(x, x);
  for (std::size_t i = 0; i < n; ++i) var -= v[i] * v[i];
  return {mean, std::sqrt(std::max(var, 0.0))};
}

double GpSurrogate::expected_improvement(const std::array<double, 4>& x, double incumbent) const {
  const Posterior post = predict(x);
  const double gap = incumbent - post.mean;
  if (post.stddev < 1e-12) return std::max(gap, 0.0);
  const double z = gap / post.stddev;
  return std::max(0.0, gap * normal_cdf(z) + post.stddev * normal_pdf(z));
}

}  // namespace adrec::hpo
