#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "adrec/graph/identity.hpp"
#include "adrec/ingest/event.hpp"
#include "adrec/ingest/normalizer.hpp"

namespace adrec::graph {

enum class NodeKind { User, Ad, Platform };
enum class EdgeKind { ViewPlatform, ClickAd, BrowseUser, ViewCrossPlatform };

std::string to_string(NodeKind k);
std::string to_string(EdgeKind k);
NodeKind node_kind_from_string(const std::string& s);
EdgeKind edge_kind_from_string(const std::string& s);

inline constexpr int kUserFeatures = 11;
inline constexpr int kAdFeatures = 8;
inline constexpr int kPlatformFeatures = 6;

struct NodeRef {
  NodeKind kind = NodeKind::User;
  int index = 0;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

/// Behavioral profile aggregated over the user's events on all platforms:
/// click frequency/day, active duration sec/day, interaction count, distinct
/// ads clicked, distinct platforms, mean session gap sec, click-through
/// ratio, browse-to-click ratio, weekend fraction, night fraction, account
/// age days.
struct UserNode {
  std::string unified_user_id;
  std::array<double, kUserFeatures> features{};
};

/// Placement-type code, primary content-label code, label count, material
/// duration sec, campaign age days, base bid index, historical CTR, creative
/// format code.
struct AdNode {
  std::string ad_id;
  std::array<double, kAdFeatures> features{};
};

/// Device-type code, system-version code, average daily visit duration sec,
/// daily active proxy, peak-hour code, region code.
struct PlatformNode {
  std::string platform_id;
  std::array<double, kPlatformFeatures> features{};
};

struct Edge {
  EdgeKind kind = EdgeKind::ClickAd;
  NodeRef src;
  NodeRef dst;
  double weight = 1.0;  // in [0, 1]
  std::array<double, ingest::kEdgeAttrCount> attrs{};  // normalized
  std::int64_t timestamp = 0;                          // raw unix seconds
};

/// Typed node tables plus one edge list with incidence indexed from both
/// endpoints. Construction is single-writer; a finished graph is immutable
/// and safe to share across readers.
struct HeteroGraph {
  std::vector<UserNode> users;
  std::vector<AdNode> ads;
  std::vector<PlatformNode> platforms;
  std::vector<Edge> edges;

  std::vector<std::vector<int>> incident;  // per global node: incident edge ids
  std::vector<int> degree;                 // incident edge count, self-loops excluded

  std::size_t node_count() const { return users.size() + ads.size() + platforms.size(); }
  int global_id(const NodeRef& ref) const;
  NodeRef node_ref(int global_id) const;
  int feature_dim(NodeKind kind) const;
  const double* features_of(int global_id, int* dim) const;

  int user_index(const std::string& unified_user_id) const;  // -1 if absent
  int ad_index(const std::string& ad_id) const;
  int platform_index(const std::string& platform_id) const;

  /// Rebuilds incidence and degree caches from the edge list.
  void reindex();
};

/// One user node per unified id, one ad node per ad id, one platform node
/// per platform id; one edge per event (ViewPlatform / ClickAd / BrowseUser)
/// with normalized attributes and weight 1. Parallel
/// (src, dst, kind, timestamp)-identical edges are collapsed.
HeteroGraph build_graph(const std::vector<ingest::EventRecord>& events, const IdentityMap& identity,
                        const ingest::NormalizerStats& stats);

/// Symmetric degree normalization with self-loops injected before degree
/// computation: d(v) = incident edge count + 1.
struct SymNorm {
  std::vector<double> edge_coeff;  // per edge: 1/sqrt(d_src * d_dst)
  std::vector<double> self_coeff;  // per global node: 1/d
};

SymNorm sym_norm(const HeteroGraph& graph);

}  // namespace adrec::graph
