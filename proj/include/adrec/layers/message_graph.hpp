#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "adrec/graph/hetero_graph.hpp"

namespace adrec::layers {

/// Directed message list the layers aggregate over: every stored edge
/// contributes a message in both directions, plus one self-loop per node.
/// Messages are sorted by (dst, src, timestamp); self-loops carry window
/// INT64_MIN so every time-restricted view keeps them.
struct MessageGraph {
  std::size_t n = 0;
  std::vector<int> src, dst;
  std::vector<double> coeff;        // symmetric normalization, full-graph degrees
  std::vector<double> weight;       // stored edge weight; 1 for self-loops
  std::vector<double> delta_t;      // t_ref - timestamp, >= 0; 0 for self-loops
  std::vector<std::int64_t> window; // floor(timestamp / dt)
  std::vector<std::int64_t> ts;     // raw timestamp; t_ref for self-loops
  std::vector<int> origin;          // stored edge id, -1 for self-loops

  std::int64_t t_ref = 0;
  std::int64_t dt_seconds = 21600;

  std::vector<int> in_begin;  // per node: first message with this dst (sorted)
  std::vector<int> in_end;

  std::size_t message_count() const { return src.size(); }
};

inline constexpr std::int64_t kSelfLoopWindow = std::numeric_limits<std::int64_t>::min();

struct EdgeSpec {
  int src = 0;
  int dst = 0;
  double coeff = 1.0;
  double weight = 1.0;
  std::int64_t ts = 0;
};

/// Generic assembly from undirected stored-edge specs; self_coeff supplies
/// the self-loop coefficient per node (full-graph 1/d for exactness of
/// sampled inference). `node_keys`, when given, orders messages within a
/// destination by these canonical ids instead of local ids, so a subgraph
/// accumulates sums in exactly the full graph's order.
MessageGraph assemble_message_graph(std::size_t n, const std::vector<EdgeSpec>& edges,
                                    const std::vector<double>& self_coeff,
                                    std::int64_t dt_seconds, std::int64_t t_ref,
                                    const std::vector<int>& node_keys = {});

MessageGraph build_message_graph(const graph::HeteroGraph& graph, const graph::SymNorm& norm,
                                 std::int64_t dt_seconds);

}  // namespace adrec::layers
