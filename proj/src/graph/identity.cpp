#include "adrec/graph/identity.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "adrec/error.hpp"

namespace adrec::graph {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);  // smaller index wins: deterministic roots
    parent[b] = a;
    return true;
  }
};

}  // namespace

int IdentityMap::index_of(const std::string& platform_id, const std::string& raw_user_id) const {
  int idx = find(platform_id, raw_user_id);
  if (idx < 0)
    throw input_error("identity map does not cover raw user (" + platform_id + ", " + raw_user_id + ")");
  return idx;
}

int IdentityMap::find(const std::string& platform_id, const std::string& raw_user_id) const {
  auto it = unified.find({platform_id, raw_user_id});
  return it == unified.end() ? -1 : it->second;
}

IdentityMap unify_users(const std::vector<ingest::EventRecord>& events,
                        std::int64_t bucket_seconds, double jaccard_threshold) {
  IdentityMap out;
  if (events.empty()) return out;

  // Collect raw ids in sorted key order; all later processing uses these
  // indices, so the result cannot depend on event order.
  std::map<IdentityMap::RawKey, int> key_index;
  for (const auto& e : events) key_index.emplace(IdentityMap::RawKey{e.platform_id, e.raw_user_id}, 0);
  std::vector<IdentityMap::RawKey> keys;
  keys.reserve(key_index.size());
  for (auto& [key, idx] : key_index) {
    idx = static_cast<int>(keys.size());
    keys.push_back(key);
  }
  const int n = static_cast<int>(keys.size());

  std::vector<std::string> hash_of(n);
  std::vector<std::set<std::int64_t>> buckets(n);
  for (const auto& e : events) {
    const int idx = key_index.at({e.platform_id, e.raw_user_id});
    hash_of[idx] = e.hashed_id;
    buckets[idx].insert(e.timestamp / bucket_seconds);
  }

  UnionFind uf(static_cast<std::size_t>(n));

  // Rule (a): equal hashed identifiers.
  std::map<std::string, int> first_with_hash;
  for (int i = 0; i < n; ++i) {
    auto [it, inserted] = first_with_hash.emplace(hash_of[i], i);
    if (!inserted && uf.unite(it->second, i)) {
      out.merges.push_back({keys[it->second], keys[i], MergeRule::HashMatch});
    }
  }

  // Rule (b): activity-bucket Jaccard >= threshold, vetoed by same-platform
  // co-occurrence in any bucket. Candidates come from a bucket inverted
  // index; a pair is examined once, at its smaller index.
  std::map<std::int64_t, std::vector<int>> by_bucket;
  for (int i = 0; i < n; ++i)
    for (std::int64_t b : buckets[i]) by_bucket[b].push_back(i);

  std::vector<std::uint64_t> candidates;  // packed (i << 32 | j), i < j
  for (const auto& [b, members] : by_bucket) {
    for (std::size_t x = 0; x < members.size(); ++x)
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        int i = members[x], j = members[y];
        if (j < i) std::swap(i, j);
        // Same-platform pairs sharing a bucket are vetoed outright.
        if (keys[i].first == keys[j].first) continue;
        candidates.push_back((static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j));
      }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (std::uint64_t packed : candidates) {
    const int i = static_cast<int>(packed >> 32);
    const int j = static_cast<int>(packed & 0xffffffffu);
    std::size_t inter = 0;
    const auto& small = buckets[i].size() <= buckets[j].size() ? buckets[i] : buckets[j];
    const auto& large = buckets[i].size() <= buckets[j].size() ? buckets[j] : buckets[i];
    for (std::int64_t b : small) inter += large.count(b);
    const std::size_t uni = buckets[i].size() + buckets[j].size() - inter;
    if (uni == 0) continue;
    const double jaccard = static_cast<double>(inter) / static_cast<double>(uni);
    if (jaccard >= jaccard_threshold && uf.unite(i, j)) {
      out.merges.push_back({keys[i], keys[j], MergeRule::ActivityMatch});
    }
  }

  // Unified indices ordered by each cluster's smallest member key.
  std::vector<int> root_index(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = uf.find(i);
    if (root_index[root] < 0) root_index[root] = next++;
    out.unified.emplace(keys[i], root_index[root]);
  }
  out.user_count = next;
  return out;
}

}  // namespace adrec::graph
