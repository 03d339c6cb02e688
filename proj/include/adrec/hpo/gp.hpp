#pragma once

#include <array>
#include <vector>

namespace adrec::hpo {

/// Gaussian process over [0, 1]^4 grid coordinates: RBF kernel with fixed
/// length scale 0.5, signal variance 1.0, observation noise 1e-4, prior
/// mean = observation mean. No hyperparameter tuning: the 108-point grid
/// does not justify it, and fixed values keep runs deterministic.
class GpSurrogate {
 public:
  GpSurrogate(double length_scale = 0.5, double signal_variance = 1.0, double noise = 1e-4)
      : length_scale_(length_scale), signal_variance_(signal_variance), noise_(noise) {}

  /// Requires at least 2 observations.
  void fit(const std::vector<std::array<double, 4>>& x, const std::vector<double>& y);

  struct Posterior {
    double mean = 0.0;
    double stddev = 0.0;
  };
  Posterior predict(const std::array<double, 4>& x) const;

  /// Expected improvement below the incumbent (minimization); >= 0, and 0
  /// only when the posterior places no mass below the incumbent.
  double expected_improvement(const std::array<double, 4>& x, double incumbent) const;

  bool fitted() const { return !x_.empty(); }

 private:
  double kernel(const std::array<double, 4>& a, const std::array<double, 4>& b) const;

  double length_scale_, signal_variance_, noise_;
  std::vector<std::array<double, 4>> x_;
  std::vector<double> alpha_;          // K^-1 (y - mean)
  std::vector<std::vector<double>> l_; // Cholesky factor of K
  double y_mean_ = 0.0;
};

}  // namespace adrec::hpo
