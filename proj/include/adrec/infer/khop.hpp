#pragma once

#include <cstdint>
#include <vector>

#include "adrec/graph/hetero_graph.hpp"

namespace adrec::infer {

/// Sampled k-hop closure around a seed set. Node hop labels equal BFS
/// distance within the sampled edge set; seeds are hop 0.
struct SubgraphBatch {
  std::vector<int> nodes;      // global ids, BFS order (seeds first)
  std::vector<int> hop;        // per node
  std::vector<int> edges;      // kept stored-edge ids, sorted
  double rate = 1.0;
  int k = 0;
  std::uint64_t seed = 0;

  std::vector<int> local_of_global;  // -1 where absent
  int local(int global_id) const { return local_of_global[global_id]; }
  bool contains(int global_id) const { return local_of_global[global_id] >= 0; }
};

/// Frontier expansion: each incident edge of a hop-h node (h < k) is kept
/// independently with probability `rate`; the keep decision is a hash of
/// (seed, expanding node, edge), so the result is order- and thread-
/// independent. rate = 1 yields the exact k-hop closure.
SubgraphBatch sample_khop(const graph::HeteroGraph& graph, const std::vector<int>& seeds, int k,
                          double rate, std::uint64_t seed);

}  // namespace adrec::infer
