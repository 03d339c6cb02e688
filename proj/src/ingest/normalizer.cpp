#include "adrec/ingest/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "adrec/error.hpp"

namespace adrec::ingest {

NormSchema default_edge_schema() {
  NormSchema schema;
  schema.fill(NormScheme::MinMax);
  schema[kAttrCcrGroup] = NormScheme::ZScore;
  schema[kAttrAdWeightIndex] = NormScheme::ZScore;
  return schema;
}

NormalizerStats fit_normalizer(const std::vector<EventRecord>& events, const NormSchema& schema) {
  if (events.empty()) throw input_error("fit_normalizer: empty event set");
  NormalizerStats stats;
  const double n = static_cast<double>(events.size());
  for (int c = 0; c < kEdgeAttrCount; ++c) {
    auto& col = stats.columns[c];
    col.scheme = schema[c];
    if (col.scheme == NormScheme::MinMax) {
      double lo = events[0].raw_attrs[c], hi = lo;
      for (const auto& e : events) {
        lo = std::min(lo, e.raw_attrs[c]);
        hi = std::max(hi, e.raw_attrs[c]);
      }
      col.a = lo;
      col.b = hi;
      col.degenerate = (hi == lo);
    } else {
      double sum = 0.0;
      for (const auto& e : events) sum += e.raw_attrs[c];
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& e : events) {
        const double d = e.raw_attrs[c] - mean;
        ss += d * d;
      }
      const double std = events.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      col.a = mean;
      col.b = std;
      col.degenerate = (std == 0.0);
    }
  }
  return stats;
}

std::array<double, kEdgeAttrCount> normalize_attrs(const NormalizerStats& stats,
                                                   const std::array<double, kEdgeAttrCount>& raw) {
  std::array<double, kEdgeAttrCount> out{};
  for (int c = 0; c < kEdgeAttrCount; ++c) {
    const auto& col = stats.columns[c];
    if (col.degenerate) {
      out[c] = 0.0;
    } else if (col.scheme == NormScheme::MinMax) {
      out[c] = std::clamp((raw[c] - col.a) / (col.b - col.a), 0.0, 1.0);
    } else {
      out[c] = (raw[c] - col.a) / col.b;
    }
  }
  return out;
}

std::vector<EventRecord> apply_normalizer(const NormalizerStats& stats,
                                          const std::vector<EventRecord>& events) {
  std::vector<EventRecord> out = events;
  for (auto& e : out) e.raw_attrs = normalize_attrs(stats, e.raw_attrs);
  return out;
}

}  // namespace adrec::ingest
