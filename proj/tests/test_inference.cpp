#include <cmath>
#include <set>

#include "adrec/error.hpp"
#include "adrec/graph/identity.hpp"
#include "adrec/infer/cache.hpp"
#include "adrec/infer/gmi.hpp"
#include "adrec/infer/khop.hpp"
#include "adrec/ingest/normalizer.hpp"
#include "adrec/ingest/synthetic.hpp"
#include "adrec/train/trainer.hpp"
#include "doctest.h"

using namespace adrec;
using namespace adrec::infer;
using adrec::ingest::Action;
using adrec::ingest::EventRecord;

namespace {

struct Pipeline {
  std::vector<EventRecord> events;
  graph::IdentityMap identity;
  graph::HeteroGraph graph;
};

Pipeline make_pipeline(int users, int ads, std::uint64_t seed) {
  Pipeline p;
  p.events = ingest::generate_synthetic(ingest::table3_spec(users, ads, seed));
  p.identity = graph::unify_users(p.events);
  p.graph = graph::build_graph(p.events, p.identity,
                               ingest::fit_normalizer(p.events, ingest::default_edge_schema()));
  return p;
}

EventRecord click(const std::string& user, const std::string& ad, std::int64_t ts) {
  EventRecord e;
  e.platform_id = "A";
  e.raw_user_id = user;
  e.hashed_id = "h_" + user;
  e.ad_id = ad;
  e.action = Action::Click;
  e.timestamp = ts;
  e.labels = {1};
  e.raw_attrs[ingest::kAttrTimestamp] = static_cast<double>(ts);
  return e;
}

graph::HeteroGraph star_graph(int leaves) {
  std::vector<EventRecord> events;
  for (int i = 0; i < leaves; ++i) events.push_back(click("center", "ad" + std::to_string(i), 100 + i));
  auto identity = graph::unify_users(events);
  return graph::build_graph(events, identity,
                            ingest::fit_normalizer(events, ingest::default_edge_schema()));
}

// Exact central 99% binomial interval: [lo, hi] with
// lo = max x such that CDF(x - 1) <= 0.005, hi = min x such that CDF(x) >= 0.995.
std::pair<int, int> binomial_central99(int n, double p) {
  std::vector<double> pmf(n + 1);
  pmf[0] = std::pow(1.0 - p, n);
  for (int k = 0; k < n; ++k) pmf[k + 1] = pmf[k] * (n - k) / (k + 1.0) * p / (1.0 - p);
  int lo = 0, hi = n;
  double cdf = 0.0;
  for (int k = 0; k <= n; ++k) {
    cdf += pmf[k];
    if (cdf <= 0.005) lo = k + 1;
    if (cdf >= 0.995) {
      hi = k;
      break;
    }
  }
  return {lo, hi};
}

train::Snapshot snapshot_for(const Pipeline& p, int dim, int heads, std::uint64_t seed) {
  train::Snapshot snap;
  snap.config = layers::GnnConfig{dim, heads, 4, ingest::kWindow6h};
  layers::init_model_params(snap.params, snap.config, seed);
  return snap;
}

}  // namespace

TEST_CASE("sample_khop: k = 0 keeps seeds only, no edges") {
  auto g = star_graph(5);
  const int center = g.global_id({graph::NodeKind::User, 0});
  auto batch = sample_khop(g, {center}, 0, 1.0, 7);
  CHECK(batch.nodes == std::vector<int>{center});
  CHECK(batch.hop == std::vector<int>{0});
  CHECK(batch.edges.empty());
}

TEST_CASE("sample_khop: rate 1 on a star includes every leaf at hop 1") {
  auto g = star_graph(12);
  const int center = g.global_id({graph::NodeKind::User, 0});
  auto batch = sample_khop(g, {center}, 1, 1.0, 7);
  // Center plus its 12 ads; the platform node has no edges (clicks only).
  CHECK(batch.nodes.size() == 1 + 12);
  for (std::size_t i = 1; i < batch.nodes.size(); ++i) {
    CHECK(batch.hop[i] == 1);
    CHECK(g.node_ref(batch.nodes[i]).kind == graph::NodeKind::Ad);
  }
  CHECK(batch.edges.size() == g.edges.size());
}

TEST_CASE("sample_khop: empty seeds and bad rate rejected") {
  auto g = star_graph(3);
  CHECK_THROWS_AS(sample_khop(g, {}, 1, 1.0, 7), Error);
  CHECK_THROWS_AS(sample_khop(g, {0}, 1, 0.0, 7), Error);
}

TEST_CASE("sample_khop: hop labels equal BFS distance in the sampled edge set") {
  auto p = make_pipeline(30, 20, 301);
  std::vector<int> seeds = {0, 5};
  auto batch = sample_khop(p.graph, seeds, 3, 0.5, 11);

  // BFS over kept edges only.
  std::vector<int> dist(p.graph.node_count(), -1);
  std::vector<std::vector<int>> adj(p.graph.node_count());
  for (int e : batch.edges) {
    const int s = p.graph.global_id(p.graph.edges[e].src);
    const int d = p.graph.global_id(p.graph.edges[e].dst);
    adj[s].push_back(d);
    adj[d].push_back(s);
  }
  std::vector<int> frontier = seeds;
  for (int s : seeds) dist[s] = 0;
  int level = 0;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int v : frontier)
      for (int u : adj[v])
        if (dist[u] < 0) {
          dist[u] = level + 1;
          next.push_back(u);
        }
    frontier = std::move(next);
    ++level;
  }
  for (std::size_t i = 0; i < batch.nodes.size(); ++i) {
    CHECK(dist[batch.nodes[i]] == batch.hop[i]);
  }
  // No duplicates; seeds included.
  std::set<int> unique_nodes(batch.nodes.begin(), batch.nodes.end());
  CHECK(unique_nodes.size() == batch.nodes.size());
  for (int s : seeds) CHECK(batch.contains(s));
}

TEST_CASE("sample_khop: deterministic for identical (graph, seeds, rate, seed)") {
  auto p = make_pipeline(25, 15, 303);
  auto a = sample_khop(p.graph, {1, 2, 3}, 2, 0.3, 99);
  auto b = sample_khop(p.graph, {1, 2, 3}, 2, 0.3, 99);
  CHECK(a.nodes == b.nodes);
  CHECK(a.hop == b.hop);
  CHECK(a.edges == b.edges);
}

TEST_CASE("sample_khop: sampled counts sit in the central 99% binomial interval") {
  const int leaves = 1000;
  const double rate = 0.15;
  auto g = star_graph(leaves);
  const int center = g.global_id({graph::NodeKind::User, 0});
  const auto [lo, hi] = binomial_central99(leaves, rate);
  int in_interval = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto batch = sample_khop(g, {center}, 1, rate, seed);
    int sampled_ads = 0;
    for (std::size_t i = 0; i < batch.nodes.size(); ++i)
      if (batch.hop[i] == 1 && g.node_ref(batch.nodes[i]).kind == graph::NodeKind::Ad)
        ++sampled_ads;
    if (sampled_ads >= lo && sampled_ads <= hi) ++in_interval;
  }
  CHECK(in_interval >= 48);
}

TEST_CASE("EmbedCache: hit, window invalidation, LRU eviction") {
  EmbedCache cache(2);
  num::Matrix e1(1, 4, 1.0), e2(1, 4, 2.0), e3(1, 4, 3.0);

  CHECK(cache.put(10, 5, e1, 1));
  auto hit = cache.get(10, 5);
  REQUIRE(hit.has_value());
  CHECK((*hit)(0, 0) == 1.0);

  // Different window tag misses.
  CHECK_FALSE(cache.get(10, 6).has_value());

  // Depth > 2 never stored.
  CHECK_FALSE(cache.put(11, 5, e2, 3));
  CHECK_FALSE(cache.get(11, 5).has_value());

  // Capacity 2, insert 3: least-recently-used is evicted.
  CHECK(cache.put(20, 5, e2, 2));  // cache: {20, 10}
  CHECK(cache.get(10, 5).has_value());   // touch 10 -> {10, 20}
  CHECK(cache.put(30, 5, e3, 0));  // evicts 20
  CHECK(cache.size() == 2);
  CHECK_FALSE(cache.get(20, 5).has_value());
  CHECK(cache.get(10, 5).has_value());
  CHECK(cache.get(30, 5).has_value());
}

TEST_CASE("estimate_memory: cost model") {
  auto p = make_pipeline(10, 8, 305);
  SubgraphBatch empty;
  empty.local_of_global.assign(p.graph.node_count(), -1);
  CHECK(estimate_memory(empty, p.graph, 128) == 0);

  // One user node (11 features), 128-dim embedding, no edges.
  SubgraphBatch one;
  one.local_of_global.assign(p.graph.node_count(), -1);
  one.nodes = {0};
  one.hop = {0};
  one.local_of_global[0] = 0;
  CHECK(estimate_memory(one, p.graph, 128) == (11 + 128) * 8);

  // Additivity over disjoint batches.
  SubgraphBatch two = one;
  two.nodes.push_back(1);
  two.hop.push_back(0);
  two.local_of_global[1] = 1;
  CHECK(estimate_memory(two, p.graph, 128) == 2 * (11 + 128) * 8);
}

TEST_CASE("gmi_infer: rate 1, k = stack depth, cold cache equals full forward bit-exactly") {
  auto p = make_pipeline(25, 15, 307);
  auto snap = snapshot_for(p, 8, 2, 71);
  train::ModelEngine engine(p.graph, p.events, p.identity, snap.config);
  auto full = engine.node_embeddings(snap.params);

  std::vector<int> seeds;
  for (int i = 0; i < static_cast<int>(p.graph.node_count()); i += 3) seeds.push_back(i);

  GmiOptions opt;
  opt.rate = 1.0;
  opt.k = layers::kStackDepth;
  auto result = gmi_infer(snap, p.graph, seeds, nullptr, opt);
  REQUIRE(result.embeddings.rows() == seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (int c = 0; c < snap.config.embed_dim; ++c)
      CHECK(result.embeddings(i, c) == full(seeds[i], c));
}

TEST_CASE("gmi_infer: budget-forced multi-batch splitting stays bit-exact at rate 1") {
  auto p = make_pipeline(20, 12, 309);
  auto snap = snapshot_for(p, 8, 2, 73);
  train::ModelEngine engine(p.graph, p.events, p.identity, snap.config);
  auto full = engine.node_embeddings(snap.params);

  std::vector<int> seeds = {0, 1, 2, 3, 4, 5, 6, 7};
  GmiOptions unlimited;
  unlimited.rate = 1.0;
  unlimited.k = layers::kStackDepth;
  auto one = gmi_infer(snap, p.graph, seeds, nullptr, unlimited);
  CHECK(one.stats.sub_batches == 1);

  // Budget just above a single-seed subgraph cost forces several batches.
  auto single = sample_khop(p.graph, {0}, unlimited.k, 1.0, 0);
  GmiOptions tight = unlimited;
  tight.budget_bytes = 2 * estimate_memory(single, p.graph, snap.config.embed_dim);
  auto many = gmi_infer(snap, p.graph, seeds, nullptr, tight);
  CHECK(many.stats.sub_batches > 1);

  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (int c = 0; c < snap.config.embed_dim; ++c) {
      CHECK(one.embeddings(i, c) == full(seeds[i], c));
      CHECK(many.embeddings(i, c) == full(seeds[i], c));
    }
}

TEST_CASE("gmi_infer: warm cache answers a repeated query with zero forwards") {
  auto p = make_pipeline(15, 10, 311);
  auto snap = snapshot_for(p, 8, 2, 79);
  EmbedCache cache(10000);
  std::vector<int> seeds = {0, 1, 2};
  GmiOptions opt;
  opt.rate = 1.0;
  opt.k = 2;

  auto first = gmi_infer(snap, p.graph, seeds, &cache, opt);
  CHECK(first.stats.forwards >= 1);
  CHECK(first.stats.cache_misses == 3);

  auto second = gmi_infer(snap, p.graph, seeds, &cache, opt);
  CHECK(second.stats.forwards == 0);
  CHECK(second.stats.nodes_computed == 0);
  CHECK(second.stats.cache_hits == 3);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (int c = 0; c < snap.config.embed_dim; ++c)
      CHECK(second.embeddings(i, c) == first.embeddings(i, c));
}

TEST_CASE("gmi_infer: budget below single-seed cost names the required bytes") {
  auto p = make_pipeline(15, 10, 313);
  auto snap = snapshot_for(p, 8, 2, 83);
  GmiOptions opt;
  opt.rate = 1.0;
  opt.k = 2;
  opt.budget_bytes = 64;
  try {
    gmi_infer(snap, p.graph, {0}, nullptr, opt);
    FAIL("expected input error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bytes") != std::string::npos);
  }
}

TEST_CASE("gmi_infer: concurrent sub-batches produce the seed-order merge") {
  auto p = make_pipeline(20, 12, 317);
  auto snap = snapshot_for(p, 8, 2, 89);
  std::vector<int> seeds = {0, 1, 2, 3, 4, 5};
  auto single = sample_khop(p.graph, {0}, 3, 1.0, 0);

  GmiOptions opt;
  opt.rate = 1.0;
  opt.k = 3;
  opt.budget_bytes = 2 * estimate_memory(single, p.graph, snap.config.embed_dim);
  auto serial = gmi_infer(snap, p.graph, seeds, nullptr, opt);
  GmiOptions par = opt;
  par.threads = 4;
  auto parallel = gmi_infer(snap, p.graph, seeds, nullptr, par);
  CHECK(serial.stats.sub_batches == parallel.stats.sub_batches);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (int c = 0; c < snap.config.embed_dim; ++c)
      CHECK(serial.embeddings(i, c) == parallel.embeddings(i, c));
}
