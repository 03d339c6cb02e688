#pragma once

#include <array>
#include <vector>

#include "adrec/ingest/event.hpp"

namespace adrec::ingest {

enum class NormScheme { MinMax, ZScore };

/// Per-column fitted statistics for the 12 edge attributes. MinMax stores
/// (min, max); ZScore stores (mean, sample std, n-1 denominator). Constant
/// columns are flagged degenerate and normalize to 0.
struct NormalizerStats {
  struct Column {
    NormScheme scheme = NormScheme::MinMax;
    double a = 0.0;  // min or mean
    double b = 0.0;  // max or std
    bool degenerate = false;
  };
  std::array<Column, kEdgeAttrCount> columns{};
};

using NormSchema = std::array<NormScheme, kEdgeAttrCount>;

/// Timestamps min-max to [0,1]; click-conversion group and ad weight index
/// z-scored; the remaining columns min-max.
NormSchema default_edge_schema();

/// Fits per-column stats on the raw attributes. Throws input_error on an
/// empty event set.
NormalizerStats fit_normalizer(const std::vector<EventRecord>& events, const NormSchema& schema);

std::array<double, kEdgeAttrCount> normalize_attrs(const NormalizerStats& stats,
                                                   const std::array<double, kEdgeAttrCount>& raw);

/// Returns copies with raw_attrs replaced by their normalized values.
/// MinMax output is clipped to [0,1] for out-of-fit values.
std::vector<EventRecord> apply_normalizer(const NormalizerStats& stats,
                                          const std::vector<EventRecord>& events);

}  // namespace adrec::ingest
