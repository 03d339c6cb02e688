#include "adrec/graph/hetero_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "adrec/error.hpp"
#include "adrec/util/hash.hpp"

namespace adrec::graph {

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::User: return "user";
    case NodeKind::Ad: return "ad";
    case NodeKind::Platform: return "platform";
  }
  return "user";
}

std::string to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::ViewPlatform: return "view-platform";
    case EdgeKind::ClickAd: return "click-ad";
    case EdgeKind::BrowseUser: return "browse-user";
    case EdgeKind::ViewCrossPlatform: return "view-cross-platform";
  }
  return "click-ad";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "user") return NodeKind::User;
  if (s == "ad") return NodeKind::Ad;
  if (s == "platform") return NodeKind::Platform;
  throw input_error("unknown node kind: " + s);
}

EdgeKind edge_kind_from_string(const std::string& s) {
  if (s == "view-platform") return EdgeKind::ViewPlatform;
  if (s == "click-ad") return EdgeKind::ClickAd;
  if (s == "browse-user") return EdgeKind::BrowseUser;
  if (s == "view-cross-platform") return EdgeKind::ViewCrossPlatform;
  throw input_error("unknown edge kind: " + s);
}

int HeteroGraph::global_id(const NodeRef& ref) const {
  switch (ref.kind) {
    case NodeKind::User: return ref.index;
    case NodeKind::Ad: return static_cast<int>(users.size()) + ref.index;
    case NodeKind::Platform: return static_cast<int>(users.size() + ads.size()) + ref.index;
  }
  return ref.index;
}

NodeRef HeteroGraph::node_ref(int id) const {
  const int u = static_cast<int>(users.size());
  const int a = static_cast<int>(ads.size());
  if (id < u) return {NodeKind::User, id};
  if (id < u + a) return {NodeKind::Ad, id - u};
  return {NodeKind::Platform, id - u - a};
}

int HeteroGraph::feature_dim(NodeKind kind) const {
  switch (kind) {
    case NodeKind::User: return kUserFeatures;
    case NodeKind::Ad: return kAdFeatures;
    case NodeKind::Platform: return kPlatformFeatures;
  }
  return 0;
}

const double* HeteroGraph::features_of(int id, int* dim) const {
  const NodeRef ref = node_ref(id);
  switch (ref.kind) {
    case NodeKind::User:
      *dim = kUserFeatures;
      return users[ref.index].features.data();
    case NodeKind::Ad:
      *dim = kAdFeatures;
      return ads[ref.index].features.data();
    case NodeKind::Platform:
      *dim = kPlatformFeatures;
      return platforms[ref.index].features.data();
  }
  *dim = 0;
  return nullptr;
}

int HeteroGraph::user_index(const std::string& id) const {
  for (std::size_t i = 0; i < users.size(); ++i)
    if (users[i].unified_user_id == id) return static_cast<int>(i);
  return -1;
}

int HeteroGraph::ad_index(const std::string& id) const {
  for (std::size_t i = 0; i < ads.size(); ++i)
    if (ads[i].ad_id == id) return static_cast<int>(i);
  return -1;
}

int HeteroGraph::platform_index(const std::string& id) const {
  for (std::size_t i = 0; i < platforms.size(); ++i)
    if (platforms[i].platform_id == id) return static_cast<int>(i);
  return -1;
}

void HeteroGraph::reindex() {
  incident.assign(node_count(), {});
  degree.assign(node_count(), 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const int s = global_id(edges[i].src);
    const int d = global_id(edges[i].dst);
    incident[s].push_back(static_cast<int>(i));
    incident[d].push_back(static_cast<int>(i));
    ++degree[s];
    ++degree[d];
  }
}

namespace {

bool is_weekend(std::int64_t ts) {
  // Unix epoch (1970-01-01) was a Thursday; day index 2 and 3 mod 7 are
  // Saturday and Sunday.
  const std::int64_t day = (ts / 86400) % 7;
  return day == 2 || day == 3;
}

bool is_night(std::int64_t ts) {
  const std::int64_t hour = (ts / 3600) % 24;
  return hour < 6;
}

struct MinMax {
  double lo = 0.0, hi = 0.0;
  bool init = false;
  void add(double v) {
    if (!init) {
      lo = hi = v;
      init = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  double norm(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

template <std::size_t N>
void minmax_columns(std::vector<std::array<double, N>>& rows) {
  if (rows.empty()) return;
  for (std::size_t c = 0; c < N; ++c) {
    MinMax mm;
    for (const auto& r : rows) mm.add(r[c]);
    for (auto& r : rows) r[c] = mm.norm(r[c]);
  }
}

}  // namespace

HeteroGraph build_graph(const std::vector<ingest::EventRecord>& events, const IdentityMap& identity,
                        const ingest::NormalizerStats& stats) {
  HeteroGraph g;

  // Node id spaces: unified users from the identity map; ads and platforms
  // in sorted id order.
  std::map<std::string, int> ad_ids, platform_ids;
  for (const auto& e : events) {
    ad_ids.emplace(e.ad_id, 0);
    platform_ids.emplace(e.platform_id, 0);
    if (identity.find(e.platform_id, e.raw_user_id) < 0)
      throw input_error("build_graph: identity map does not cover event (platform=" +
                        e.platform_id + ", raw_user=" + e.raw_user_id + ", ad=" + e.ad_id +
                        ", ts=" + std::to_string(e.timestamp) + ")");
  }
  {
    int next = 0;
    for (auto& [id, idx] : ad_ids) idx = next++;
    next = 0;
    for (auto& [id, idx] : platform_ids) idx = next++;
  }

  g.users.resize(identity.user_count);
  for (const auto& [key, idx] : identity.unified) {
    if (g.users[idx].unified_user_id.empty())
      g.users[idx].unified_user_id = "user_" + std::to_string(idx);
  }
  g.ads.resize(ad_ids.size());
  for (const auto& [id, idx] : ad_ids) g.ads[idx].ad_id = id;
  g.platforms.resize(platform_ids.size());
  for (const auto& [id, idx] : platform_ids) g.platforms[idx].platform_id = id;

  // Per-entity accumulators for feature derivation.
  struct UserAcc {
    int events = 0, clicks = 0, browses = 0;
    double dwell = 0.0;
    std::set<std::string> ads_clicked, platforms;
    std::vector<std::int64_t> times;
    int weekend = 0, night = 0;
  };
  struct AdAcc {
    int events = 0, clicks = 0;
    std::set<int> labels;
    std::map<int, int> label_counts;
    double weight_index_sum = 0.0;
    std::int64_t first_ts = 0;
    bool seen = false;
  };
  struct PlatformAcc {
    int events = 0;
    double dwell = 0.0;
    std::set<std::string> users;
    std::set<std::int64_t> days;
    std::map<int, int> hour_counts;
  };
  std::vector<UserAcc> user_acc(g.users.size());
  std::vector<AdAcc> ad_acc(g.ads.size());
  std::vector<PlatformAcc> platform_acc(g.platforms.size());

  std::int64_t max_ts = 0;
  for (const auto& e : events) max_ts = std::max(max_ts, e.timestamp);

  for (const auto& e : events) {
    const int u = identity.index_of(e.platform_id, e.raw_user_id);
    const int a = ad_ids.at(e.ad_id);
    const int p = platform_ids.at(e.platform_id);

    auto& ua = user_acc[u];
    ++ua.events;
    if (e.action == ingest::Action::Click) {
      ++ua.clicks;
      ua.ads_clicked.insert(e.ad_id);
    }
    if (e.action == ingest::Action::Browse) ++ua.browses;
    ua.dwell += e.raw_attrs[ingest::kAttrDwellTime];
    ua.platforms.insert(e.platform_id);
    ua.times.push_back(e.timestamp);
    if (is_weekend(e.timestamp)) ++ua.weekend;
    if (is_night(e.timestamp)) ++ua.night;

    auto& aa = ad_acc[a];
    ++aa.events;
    if (e.action == ingest::Action::Click) ++aa.clicks;
    for (int l : e.labels) {
      aa.labels.insert(l);
      ++aa.label_counts[l];
    }
    aa.weight_index_sum += e.raw_attrs[ingest::kAttrAdWeightIndex];
    if (!aa.seen || e.timestamp < aa.first_ts) aa.first_ts = e.timestamp;
    aa.seen = true;

    auto& pa = platform_acc[p];
    ++pa.events;
    pa.dwell += e.raw_attrs[ingest::kAttrDwellTime];
    pa.users.insert(e.raw_user_id);
    pa.days.insert(e.timestamp / 86400);
    ++pa.hour_counts[static_cast<int>((e.timestamp / 3600) % 24)];
  }

  std::vector<std::array<double, kUserFeatures>> user_rows(g.users.size());
  for (std::size_t u = 0; u < g.users.size(); ++u) {
    auto& acc = user_acc[u];
    auto& f = user_rows[u];
    std::sort(acc.times.begin(), acc.times.end());
    const double span_days =
        acc.times.empty()
            ? 1.0
            : std::max(1.0, static_cast<double>(acc.times.back() - acc.times.front()) / 86400.0);
    double gap_sum = 0.0;
    for (std::size_t i = 1; i < acc.times.size(); ++i)
      gap_sum += static_cast<double>(acc.times[i] - acc.times[i - 1]);
    f[0] = acc.clicks / span_days;
    f[1] = acc.dwell / span_days;
    f[2] = acc.events;
    f[3] = static_cast<double>(acc.ads_clicked.size());
    f[4] = static_cast<double>(acc.platforms.size());
    f[5] = acc.times.size() > 1 ? gap_sum / (acc.times.size() - 1) : 0.0;
    f[6] = acc.events ? static_cast<double>(acc.clicks) / acc.events : 0.0;
    f[7] = static_cast<double>(acc.browses) / std::max(1, acc.clicks);
    f[8] = acc.events ? static_cast<double>(acc.weekend) / acc.events : 0.0;
    f[9] = acc.events ? static_cast<double>(acc.night) / acc.events : 0.0;
    f[10] = acc.times.empty() ? 0.0 : static_cast<double>(max_ts - acc.times.front()) / 86400.0;
  }

  std::vector<std::array<double, kAdFeatures>> ad_rows(g.ads.size());
  for (std::size_t a = 0; a < g.ads.size(); ++a) {
    auto& acc = ad_acc[a];
    auto& f = ad_rows[a];
    const std::uint64_t h = util::fnv1a(g.ads[a].ad_id);
    int primary_label = 0, best = 0;
    for (const auto& [label, count] : acc.label_counts)
      if (count > best) {
        best = count;
        primary_label = label;
      }
    f[0] = static_cast<double>(h % 5);
    f[1] = primary_label;
    f[2] = static_cast<double>(acc.labels.size());
    f[3] = 15.0 + static_cast<double>((h >> 8) % 46);
    f[4] = acc.seen ? static_cast<double>(max_ts - acc.first_ts) / 86400.0 : 0.0;
    f[5] = acc.events ? acc.weight_index_sum / acc.events : 0.0;
    f[6] = acc.events ? static_cast<double>(acc.clicks) / acc.events : 0.0;
    f[7] = static_cast<double>((h >> 16) % 3);
  }

  std::vector<std::array<double, kPlatformFeatures>> platform_rows(g.platforms.size());
  for (std::size_t p = 0; p < g.platforms.size(); ++p) {
    auto& acc = platform_acc[p];
    auto& f = platform_rows[p];
    const std::uint64_t h = util::fnv1a(g.platforms[p].platform_id);
    int peak_hour = 0, best = 0;
    for (const auto& [hour, count] : acc.hour_counts)
      if (count > best) {
        best = count;
        peak_hour = hour;
      }
    const double days = std::max<std::size_t>(1, acc.days.size());
    f[0] = static_cast<double>(h % 4);
    f[1] = static_cast<double>((h >> 8) % 7);
    f[2] = acc.dwell / days;
    f[3] = static_cast<double>(acc.users.size()) / days;
    f[4] = peak_hour;
    f[5] = static_cast<double>((h >> 16) % 10);
  }

  // Column-wise min-max over each node table keeps feature scales comparable
  // with the normalized edge attributes.
  minmax_columns(user_rows);
  minmax_columns(ad_rows);
  minmax_columns(platform_rows);
  for (std::size_t u = 0; u < g.users.size(); ++u) g.users[u].features = user_rows[u];
  for (std::size_t a = 0; a < g.ads.size(); ++a) g.ads[a].features = ad_rows[a];
  for (std::size_t p = 0; p < g.platforms.size(); ++p) g.platforms[p].features = platform_rows[p];

  // Edges: one per event, collapsing (src, dst, kind, timestamp) duplicates.
  std::set<std::tuple<int, int, int, std::int64_t>> seen_edges;
  for (const auto& e : events) {
    const int u = identity.index_of(e.platform_id, e.raw_user_id);
    const int a = ad_ids.at(e.ad_id);
    const int p = platform_ids.at(e.platform_id);

    Edge edge;
    edge.timestamp = e.timestamp;
    edge.weight = 1.0;
    edge.attrs = ingest::normalize_attrs(stats, e.raw_attrs);
    switch (e.action) {
      case ingest::Action::Click:
        edge.kind = EdgeKind::ClickAd;
        edge.src = {NodeKind::User, u};
        edge.dst = {NodeKind::Ad, a};
        break;
      case ingest::Action::View:
        edge.kind = EdgeKind::ViewPlatform;
        edge.src = {NodeKind::User, u};
        edge.dst = {NodeKind::Platform, p};
        break;
      case ingest::Action::Browse:
        edge.kind = EdgeKind::BrowseUser;
        edge.src = {NodeKind::Ad, a};
        edge.dst = {NodeKind::User, u};
        break;
    }
    const auto key = std::make_tuple(g.global_id(edge.src), g.global_id(edge.dst),
                                     static_cast<int>(edge.kind), edge.timestamp);
    if (!seen_edges.insert(key).second) continue;
    g.edges.push_back(std::move(edge));
  }

  g.reindex();
  return g;
}

SymNorm sym_norm(const HeteroGraph& graph) {
  SymNorm out;
  out.edge_coeff.resize(graph.edges.size());
  out.self_coeff.resize(graph.node_count());
  for (std::size_t v = 0; v < graph.node_count(); ++v)
    out.self_coeff[v] = 1.0 / (graph.degree[v] + 1.0);
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const auto& e = graph.edges[i];
    const double ds = graph.degree[graph.global_id(e.src)] + 1.0;
    const double dd = graph.degree[graph.global_id(e.dst)] + 1.0;
    out.edge_coeff[i] = 1.0 / std::sqrt(ds * dd);
  }
  return out;
}

}  // namespace adrec::graph
