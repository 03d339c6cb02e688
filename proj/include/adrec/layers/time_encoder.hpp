#pragma once

#include <cstdint>
#include <vector>

#include "adrec/numerics/matrix.hpp"

namespace adrec::layers {

/// Sinusoidal encoding of an event-time offset within a reference window:
/// phi(t)[2i] = cos(w_i * t / dt), phi(t)[2i+1] = sin(w_i * t / dt) with
/// frequencies w_i = 10^(-4i/dim), strictly decreasing.
struct TimeEncoder {
  int dim = 8;  // even
  std::int64_t dt_ref = 21600;

  std::vector<double> frequencies() const;
  void encode_into(double t_seconds, double* out) const;
  std::vector<double> encode(double t_seconds) const;

  /// Row per offset.
  num::Matrix encode_rows(const std::vector<double>& offsets) const;
};

}  // namespace adrec::layers
