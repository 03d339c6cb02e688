#include "adrec/layers/message_graph.hpp"

#include <algorithm>
#include <numeric>

#include "adrec/error.hpp"

namespace adrec::layers {

MessageGraph assemble_message_graph(std::size_t n, const std::vector<EdgeSpec>& edges,
                                    const std::vector<double>& self_coeff,
                                    std::int64_t dt_seconds, std::int64_t t_ref,
                                    const std::vector<int>& node_keys) {
  if (self_coeff.size() != n) throw shape_error("assemble_message_graph: self_coeff size mismatch");
  if (!node_keys.empty() && node_keys.size() != n)
    throw shape_error("assemble_message_graph: node_keys size mismatch");
  MessageGraph mg;
  mg.n = n;
  mg.dt_seconds = dt_seconds;
  mg.t_ref = t_ref;

  auto key_of = [&](int v) { return node_keys.empty() ? v : node_keys[v]; };

  struct Msg {
    int src, dst, origin, src_key;
    double coeff, weight;
    std::int64_t ts, window;
  };
  std::vector<Msg> msgs;
  msgs.reserve(edges.size() * 2 + n);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const std::int64_t w = e.ts / dt_seconds;
    msgs.push_back({e.src, e.dst, static_cast<int>(i), key_of(e.src), e.coeff, e.weight, e.ts, w});
    msgs.push_back({e.dst, e.src, static_cast<int>(i), key_of(e.dst), e.coeff, e.weight, e.ts, w});
  }
  for (std::size_t v = 0; v < n; ++v) {
    msgs.push_back({static_cast<int>(v), static_cast<int>(v), -1, key_of(static_cast<int>(v)),
                    self_coeff[v], 1.0, t_ref, kSelfLoopWindow});
  }
  std::sort(msgs.begin(), msgs.end(), [](const Msg& a, const Msg& b) {
    if (a.dst != b.dst) return a.dst < b.dst;
    if (a.src_key != b.src_key) return a.src_key < b.src_key;
    if (a.ts != b.ts) return a.ts < b.ts;
    return a.origin < b.origin;
  });

  const std::size_t m = msgs.size();
  mg.src.resize(m);
  mg.dst.resize(m);
  mg.coeff.resize(m);
  mg.weight.resize(m);
  mg.delta_t.resize(m);
  mg.window.resize(m);
  mg.ts.resize(m);
  mg.origin.resize(m);
  mg.in_begin.assign(n, 0);
  mg.in_end.assign(n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    mg.src[i] = msgs[i].src;
    mg.dst[i] = msgs[i].dst;
    mg.coeff[i] = msgs[i].coeff;
    mg.weight[i] = msgs[i].weight;
    mg.ts[i] = msgs[i].ts;
    mg.window[i] = msgs[i].window;
    mg.origin[i] = msgs[i].origin;
    mg.delta_t[i] = std::max(0.0, static_cast<double>(t_ref - msgs[i].ts));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0 || mg.dst[i] != mg.dst[i - 1]) mg.in_begin[mg.dst[i]] = static_cast<int>(i);
    mg.in_end[mg.dst[i]] = static_cast<int>(i) + 1;
  }
  return mg;
}

MessageGraph build_message_graph(const graph::HeteroGraph& graph, const graph::SymNorm& norm,
                                 std::int64_t dt_seconds) {
  std::int64_t t_ref = 0;
  for (const auto& e : graph.edges) t_ref = std::max(t_ref, e.timestamp);
  std::vector<EdgeSpec> specs;
  specs.reserve(graph.edges.size());
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const auto& e = graph.edges[i];
    specs.push_back({graph.global_id(e.src), graph.global_id(e.dst), norm.edge_coeff[i], e.weight,
                     e.timestamp});
  }
  return assemble_message_graph(graph.node_count(), specs, norm.self_coeff, dt_seconds, t_ref);
}

}  // namespace adrec::layers
