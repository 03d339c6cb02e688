#include "adrec/layers/time_encoder.hpp"

#include <cmath>

#include "adrec/error.hpp"

namespace adrec::layers {

std::vector<double> TimeEncoder::frequencies() const {
  if (dim % 2 != 0 || dim <= 0) throw input_error("time encoder dimension must be positive and even");
  std::vector<double> w(dim / 2);
  for (int i = 0; i < dim / 2; ++i) w[i] = std::pow(10.0, -4.0 * i / dim);
  return w;
}

void TimeEncoder::encode_into(double t_seconds, double* out) const {
  const double scaled = t_seconds / static_cast<double>(dt_ref);
  for (int i = 0; i < dim / 2; ++i) {
    const double x = std::pow(10.0, -4.0 * i / dim) * scaled;
    out[2 * i] = std::cos(x);
    out[2 * i + 1] = std::sin(x);
  }
}

std::vector<double> TimeEncoder::encode(double t_seconds) const {
  if (dim % 2 != 0 || dim <= 0) throw input_error("time encoder dimension must be positive and even");
  std::vector<double> out(dim);
  encode_into(t_seconds, out.data());
  return out;
}

num::Matrix TimeEncoder::encode_rows(const std::vector<double>& offsets) const {
  if (dim % 2 != 0 || dim <= 0) throw input_error("time encoder dimension must be positive and even");
  num::Matrix out(offsets.size(), dim);
  for (std::size_t i = 0; i < offsets.size(); ++i) encode_into(offsets[i], out.row(i));
  return out;
}

}  // namespace adrec::layers
