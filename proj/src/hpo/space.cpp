#include "adrec/hpo/space.hpp"

#include <cmath>

namespace adrec::hpo {

std::vector<ConfigPoint> SearchSpace::grid() const {
  std::vector<ConfigPoint> points;
  points.reserve(size());
  for (double lr : lrs)
    for (int b : batches)
      for (int d : embed_dims)
        for (int h : heads) points.push_back({lr, b, d, h});
  return points;
}

namespace {

double unit(double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; }

}  // namespace

std::array<double, 4> SearchSpace::normalize(const ConfigPoint& p) const {
  auto bounds = [](const auto& axis) {
    double lo = axis.front(), hi = axis.front();
    for (double v : axis) {
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
    return std::pair<double, double>{lo, hi};
  };
  const auto [lr_lo, lr_hi] = bounds(lrs);
  const auto [b_lo, b_hi] = bounds(batches);
  const auto [d_lo, d_hi] = bounds(embed_dims);
  const auto [h_lo, h_hi] = bounds(heads);
  return {unit(std::log(p.lr), std::log(lr_lo), std::log(lr_hi)), unit(p.batch, b_lo, b_hi),
          unit(p.embed_dim, d_lo, d_hi), unit(p.heads, h_lo, h_hi)};
}

}  // namespace adrec::hpo
