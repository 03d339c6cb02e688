#pragma once

#include <cstdint>
#include <vector>

#include "adrec/graph/hetero_graph.hpp"

namespace adrec::graph {

/// Adds one ViewCrossPlatform edge User -> Q per (user, ordered platform
/// pair (P, Q)) with at least one qualifying click pair: a click on P
/// followed within `window_seconds` by a click on Q whose ad label sets have
/// Jaccard similarity >= label_jaccard. Edge weight is
/// min(1, 0.85 + 0.03 * (f - 1)) for f qualifying pairs; attributes carry
/// the latest qualifying timestamp and the label-match score. Returns the
/// number of edges added.
int derive_cross_platform_edges(HeteroGraph& graph, const std::vector<ingest::EventRecord>& events,
                                const IdentityMap& identity,
                                const ingest::NormalizerStats& stats,
                                std::int64_t window_seconds = 24 * 3600,
                                double label_jaccard = 0.5);

double cross_platform_weight(int qualifying_pairs);

}  // namespace adrec::graph
