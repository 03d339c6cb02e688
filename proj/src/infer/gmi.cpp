#include "adrec/infer/gmi.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>
#include <thread>

#include "adrec/error.hpp"
#include "adrec/layers/gnn.hpp"

namespace adrec::infer {

using num::Matrix;

std::size_t estimate_memory(const SubgraphBatch& batch, const graph::HeteroGraph& graph,
                            int embed_dim) {
  std::size_t bytes = 0;
  for (int node : batch.nodes) {
    int dim = 0;
    graph.features_of(node, &dim);
    bytes += static_cast<std::size_t>(dim + embed_dim) * 8;
  }
  bytes += batch.edges.size() * (ingest::kEdgeAttrCount + 1) * 8;
  return bytes;
}

namespace {

/// Forward the sampled subgraph with full-graph coefficients and the full
/// graph's time reference; returns final embeddings in batch-local order.
Matrix forward_subgraph(const train::Snapshot& snapshot, const graph::HeteroGraph& graph,
                        const graph::SymNorm& norm, std::int64_t t_ref,
                        const SubgraphBatch& batch) {
  std::vector<layers::EdgeSpec> specs;
  specs.reserve(batch.edges.size());
  for (int e : batch.edges) {
    const auto& edge = graph.edges[e];
    specs.push_back({batch.local(graph.global_id(edge.src)), batch.local(graph.global_id(edge.dst)),
                     norm.edge_coeff[e], edge.weight, edge.timestamp});
  }
  std::vector<double> self_coeff(batch.nodes.size());
  for (std::size_t i = 0; i < batch.nodes.size(); ++i)
    self_coeff[i] = norm.self_coeff[batch.nodes[i]];
  auto mg = layers::assemble_message_graph(batch.nodes.size(), specs, self_coeff,
                                           snapshot.config.dt_seconds, t_ref, batch.nodes);

  // Kind-major feature blocks with the local order mapping.
  layers::ProjectionInput input;
  std::vector<int> users, ads, platforms;
  for (std::size_t i = 0; i < batch.nodes.size(); ++i) {
    switch (graph.node_ref(batch.nodes[i]).kind) {
      case graph::NodeKind::User: users.push_back(static_cast<int>(i)); break;
      case graph::NodeKind::Ad: ads.push_back(static_cast<int>(i)); break;
      case graph::NodeKind::Platform: platforms.push_back(static_cast<int>(i)); break;
    }
  }
  auto fill = [&](const std::vector<int>& locals, Matrix& out) {
    for (std::size_t r = 0; r < locals.size(); ++r) {
      int dim = 0;
      const double* f = graph.features_of(batch.nodes[locals[r]], &dim);
      for (int c = 0; c < dim; ++c) out(r, c) = f[c];
    }
  };
  input.user_feats = Matrix(users.size(), graph::kUserFeatures);
  input.ad_feats = Matrix(ads.size(), graph::kAdFeatures);
  input.platform_feats = Matrix(platforms.size(), graph::kPlatformFeatures);
  fill(users, input.user_feats);
  fill(ads, input.ad_feats);
  fill(platforms, input.platform_feats);
  input.local_of_row.reserve(batch.nodes.size());
  for (int l : users) input.local_of_row.push_back(l);
  for (int l : ads) input.local_of_row.push_back(l);
  for (int l : platforms) input.local_of_row.push_back(l);

  num::Tape tape;
  auto stack = layers::stack_forward(tape, snapshot.params, input, mg, snapshot.config);
  return tape.value(stack.final);
}

}  // namespace

GmiResult gmi_infer(const train::Snapshot& snapshot, const graph::HeteroGraph& graph,
                    const std::vector<int>& seeds, EmbedCache* cache, const GmiOptions& options) {
  if (seeds.empty()) throw input_error("gmi_infer: empty seed set");
  if (options.k < layers::kStackDepth)
    std::cerr << "gmi_infer: k = " << options.k << " is below the stack depth "
              << layers::kStackDepth << "; seed embeddings will be truncated approximations\n";

  const auto norm = graph::sym_norm(graph);
  std::int64_t t_ref = 0;
  for (const auto& e : graph.edges) t_ref = std::max(t_ref, e.timestamp);
  const std::int64_t window_tag =
      options.window_tag >= 0 ? options.window_tag : t_ref / snapshot.config.dt_seconds;

  // Greedy budget packing in seed order: extend the current sub-batch while
  // the jointly sampled subgraph fits.
  std::vector<std::vector<int>> groups;
  if (options.budget_bytes == 0) {
    groups.push_back(seeds);
  } else {
    std::vector<int> current;
    for (int s : seeds) {
      std::vector<int> tentative = current;
      tentative.push_back(s);
      auto batch = sample_khop(graph, tentative, options.k, options.rate, options.sample_seed);
      const std::size_t cost = estimate_memory(batch, graph, snapshot.config.embed_dim);
      if (cost <= options.budget_bytes) {
        current = std::move(tentative);
        continue;
      }
      if (current.empty())
        throw input_error("gmi_infer: memory budget " + std::to_string(options.budget_bytes) +
                          " bytes below single-seed requirement of " + std::to_string(cost) +
                          " bytes");
      groups.push_back(current);
      current = {s};
      auto single = sample_khop(graph, current, options.k, options.rate, options.sample_seed);
      const std::size_t single_cost = estimate_memory(single, graph, snapshot.config.embed_dim);
      if (single_cost > options.budget_bytes)
        throw input_error("gmi_infer: memory budget " + std::to_string(options.budget_bytes) +
                          " bytes below single-seed requirement of " + std::to_string(single_cost) +
                          " bytes");
    }
    if (!current.empty()) groups.push_back(current);
  }

  GmiResult result;
  result.stats.sub_batches = static_cast<int>(groups.size());
  result.embeddings = Matrix(seeds.size(), snapshot.config.embed_dim);
  std::vector<std::size_t> seed_offset(groups.size() + 1, 0);
  for (std::size_t g = 0; g < groups.size(); ++g)
    seed_offset[g + 1] = seed_offset[g] + groups[g].size();

  std::mutex stats_mu;
  auto run_group = [&](std::size_t g) {
    const auto& group = groups[g];
    // Cache check per seed.
    std::vector<std::optional<Matrix>> cached(group.size());
    bool all_hit = cache != nullptr;
    int hits = 0, misses = 0;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (cache) {
        cached[i] = cache->get(group[i], window_tag);
        if (cached[i]) ++hits;
        else {
          ++misses;
          all_hit = false;
        }
      }
    }

    Matrix local;
    SubgraphBatch batch;
    if (!all_hit || cache == nullptr) {
      batch = sample_khop(graph, group, options.k, options.rate, options.sample_seed);
      local = forward_subgraph(snapshot, graph, norm, t_ref, batch);
      if (cache) {
        for (std::size_t i = 0; i < batch.nodes.size(); ++i) {
          if (batch.hop[i] > kCacheMaxHop) continue;
          Matrix row(1, snapshot.config.embed_dim);
          std::copy(local.row(i), local.row(i) + local.cols(), row.data());
          cache->put(batch.nodes[i], window_tag, std::move(row), batch.hop[i]);
        }
      }
    }

    for (std::size_t i = 0; i < group.size(); ++i) {
      double* out = result.embeddings.row(seed_offset[g] + i);
      if (cached[i]) {
        std::copy(cached[i]->data(), cached[i]->data() + cached[i]->size(), out);
      } else {
        const int l = batch.local(group[i]);
        std::copy(local.row(l), local.row(l) + local.cols(), out);
      }
    }

    std::lock_guard<std::mutex> lock(stats_mu);
    result.stats.cache_hits += hits;
    result.stats.cache_misses += misses;
    if (!all_hit || cache == nullptr) {
      result.stats.forwards += 1;
      result.stats.nodes_computed += static_cast<int>(batch.nodes.size());
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1 || groups.size() <= 1) {
    for (std::size_t g = 0; g < groups.size(); ++g) run_group(g);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex next_mu;
    for (int t = 0; t < std::min<std::size_t>(threads, groups.size()); ++t) {
      pool.emplace_back([&]() {
        while (true) {
          std::size_t g;
          {
            std::lock_guard<std::mutex> lock(next_mu);
            if (next >= groups.size()) return;
            g = next++;
          }
          run_group(g);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return result;
}

}  // namespace adrec::infer
