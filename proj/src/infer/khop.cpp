#include "adrec/infer/khop.hpp"

#include <algorithm>

#include "adrec/error.hpp"
#include "adrec/util/hash.hpp"

namespace adrec::infer {

namespace {

bool keep_neighbor(std::uint64_t seed, int node, int neighbor, int hop, double rate) {
  if (rate >= 1.0) return true;
  std::uint64_t h = util::mix(seed ^ util::mix(static_cast<std::uint64_t>(node) * 0x9e3779b97f4a7c15ull ^
                                               static_cast<std::uint64_t>(neighbor) * 0xc2b2ae3d27d4eb4full ^
                                               static_cast<std::uint64_t>(hop)));
  return util::unit_from_hash(h) < rate;
}

}  // namespace

SubgraphBatch sample_khop(const graph::HeteroGraph& graph, const std::vector<int>& seeds, int k,
                          double rate, std::uint64_t seed) {
  if (seeds.empty()) throw input_error("sample_khop: empty seed set");
  if (rate <= 0.0 || rate > 1.0) throw input_error("sample_khop: rate must be in (0, 1]");
  if (k < 0) throw input_error("sample_khop: k must be >= 0");

  SubgraphBatch batch;
  batch.rate = rate;
  batch.k = k;
  batch.seed = seed;
  batch.local_of_global.assign(graph.node_count(), -1);

  for (int s : seeds) {
    if (s < 0 || s >= static_cast<int>(graph.node_count()))
      throw input_error("sample_khop: seed out of range");
    if (batch.local_of_global[s] >= 0) continue;
    batch.local_of_global[s] = static_cast<int>(batch.nodes.size());
    batch.nodes.push_back(s);
    batch.hop.push_back(0);
  }

  std::vector<char> edge_kept(graph.edges.size(), 0);
  std::size_t frontier_begin = 0;
  for (int h = 0; h < k; ++h) {
    const std::size_t frontier_end = batch.nodes.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      const int v = batch.nodes[i];
      for (int e : graph.incident[v]) {
        const auto& edge = graph.edges[e];
        const int s_id = graph.global_id(edge.src);
        const int d_id = graph.global_id(edge.dst);
        const int u = s_id == v ? d_id : s_id;
        if (!keep_neighbor(seed, v, u, h, rate)) continue;
        edge_kept[e] = 1;
        if (batch.local_of_global[u] < 0) {
          batch.local_of_global[u] = static_cast<int>(batch.nodes.size());
          batch.nodes.push_back(u);
          batch.hop.push_back(h + 1);
        }
      }
    }
    frontier_begin = frontier_end;
  }

  for (std::size_t e = 0; e < graph.edges.size(); ++e)
    if (edge_kept[e]) batch.edges.push_back(static_cast<int>(e));
  return batch;
}

}  // namespace adrec::infer
