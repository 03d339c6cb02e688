#include "adrec/graph/cross_platform.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace adrec::graph {

double cross_platform_weight(int f) { return std::min(1.0, 0.85 + 0.03 * (f - 1)); }

namespace {

double label_jaccard_sim(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (int x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace

int derive_cross_platform_edges(HeteroGraph& graph, const std::vector<ingest::EventRecord>& events,
                                const IdentityMap& identity,
                                const ingest::NormalizerStats& stats,
                                std::int64_t window_seconds, double label_jaccard) {
  struct Click {
    int platform;
    std::int64_t ts;
    const std::vector<int>* labels;
  };
  std::map<std::string, int> platform_ids;
  for (std::size_t p = 0; p < graph.platforms.size(); ++p)
    platform_ids[graph.platforms[p].platform_id] = static_cast<int>(p);

  std::vector<std::vector<Click>> clicks_of_user(graph.users.size());
  for (const auto& e : events) {
    if (e.action != ingest::Action::Click) continue;
    const int u = identity.index_of(e.platform_id, e.raw_user_id);
    clicks_of_user[u].push_back({platform_ids.at(e.platform_id), e.timestamp, &e.labels});
  }

  int added = 0;
  for (std::size_t u = 0; u < clicks_of_user.size(); ++u) {
    auto& clicks = clicks_of_user[u];
    if (clicks.size() < 2) continue;
    std::sort(clicks.begin(), clicks.end(), [](const Click& a, const Click& b) {
      if (a.ts != b.ts) return a.ts < b.ts;
      return a.platform < b.platform;
    });

    struct PairStats {
      int count = 0;
      std::int64_t latest_ts = 0;
      double best_match = 0.0;
    };
    std::map<std::pair<int, int>, PairStats> pair_stats;  // (P, Q): click on P then on Q
    for (std::size_t i = 0; i < clicks.size(); ++i) {
      for (std::size_t j = i + 1; j < clicks.size(); ++j) {
        if (clicks[j].ts - clicks[i].ts > window_seconds) break;
        if (clicks[i].platform == clicks[j].platform) continue;
        const double sim = label_jaccard_sim(*clicks[i].labels, *clicks[j].labels);
        if (sim < label_jaccard) continue;
        auto& st = pair_stats[{clicks[i].platform, clicks[j].platform}];
        ++st.count;
        st.latest_ts = std::max(st.latest_ts, clicks[j].ts);
        st.best_match = std::max(st.best_match, sim);
      }
    }

    for (const auto& [pq, st] : pair_stats) {
      Edge edge;
      edge.kind = EdgeKind::ViewCrossPlatform;
      edge.src = {NodeKind::User, static_cast<int>(u)};
      edge.dst = {NodeKind::Platform, pq.second};
      edge.weight = cross_platform_weight(st.count);
      edge.timestamp = st.latest_ts;
      std::array<double, ingest::kEdgeAttrCount> raw{};
      raw[ingest::kAttrTimestamp] = static_cast<double>(st.latest_ts);
      raw[ingest::kAttrHourOfDay] = static_cast<double>((st.latest_ts / 3600) % 24);
      raw[ingest::kAttrDayOfWeek] = static_cast<double>((st.latest_ts / 86400) % 7);
      raw[ingest::kAttrPlatformCode] = pq.second;
      raw[ingest::kAttrLabelMatch] = st.best_match;
      edge.attrs = ingest::normalize_attrs(stats, raw);
      // The label-match score is already a similarity in [0, 1]; keep it.
      edge.attrs[ingest::kAttrLabelMatch] = st.best_match;
      graph.edges.push_back(edge);
      ++added;
    }
  }
  if (added) graph.reindex();
  return added;
}

}  // namespace adrec::graph
