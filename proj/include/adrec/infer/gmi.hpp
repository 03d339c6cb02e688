#pragma once

#include <cstdint>
#include <vector>

#include "adrec/infer/cache.hpp"
#include "adrec/infer/khop.hpp"
#include "adrec/train/trainer.hpp"

namespace adrec::infer {

/// Cost model: (feature dims + embedding dims) * 8 bytes per node plus
/// (12 attrs + coefficient) * 8 bytes per included stored edge.
std::size_t estimate_memory(const SubgraphBatch& batch, const graph::HeteroGraph& graph,
                            int embed_dim);

struct GmiStats {
  int sub_batches = 0;
  int forwards = 0;        // stack computations actually run
  int nodes_computed = 0;  // rows produced by those forwards
  int cache_hits = 0;
  int cache_misses = 0;
};

struct GmiResult {
  num::Matrix embeddings;  // one row per seed, in seed order
  GmiStats stats;
};

struct GmiOptions {
  std::size_t budget_bytes = 0;  // 0 = unlimited
  double rate = 0.15;
  int k = 2;
  std::uint64_t sample_seed = 0;
  std::int64_t window_tag = -1;  // -1: derived from the graph clock (t_ref / dt)
  int threads = 1;               // sub-batches may run concurrently
};

/// Graph mini-batch inference: seeds split greedily into budget-bounded
/// sub-batches; per sub-batch a sampled k-hop subgraph is forwarded with
/// full-graph normalization coefficients, the cache serving and receiving
/// hop <= 2 embeddings. At rate 1, k = stack depth and a cold cache, every
/// seed row is bit-identical to the full-graph forward.
GmiResult gmi_infer(const train::Snapshot& snapshot, const graph::HeteroGraph& graph,
                    const std::vector<int>& seeds, EmbedCache* cache, const GmiOptions& options);

}  // namespace adrec::infer
