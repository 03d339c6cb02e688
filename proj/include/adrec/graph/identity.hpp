#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adrec/ingest/event.hpp"

namespace adrec::graph {

enum class MergeRule { HashMatch, ActivityMatch };

/// (platform_id, raw_user_id) -> unified user index. Merges are
/// transitive-closed; unified indices are assigned by the sorted smallest
/// member key of each cluster, so the map is independent of event order.
struct IdentityMap {
  using RawKey = std::pair<std::string, std::string>;  // (platform_id, raw_user_id)

  std::map<RawKey, int> unified;
  int user_count = 0;

  struct Merge {
    RawKey a;
    RawKey b;
    MergeRule rule;
  };
  std::vector<Merge> merges;  // provenance, in applied order

  int index_of(const std::string& platform_id, const std::string& raw_user_id) const;
  /// -1 when the raw id was never observed.
  int find(const std::string& platform_id, const std::string& raw_user_id) const;
};

/// Two raw ids merge iff (a) their hashed identifiers are equal, or (b)
/// their 1h-bucketed activity sets have Jaccard similarity >= threshold and
/// they never co-occur in the same bucket on the same platform. Candidate
/// pairs are processed in sorted key order, so the result is permutation
/// independent.
IdentityMap unify_users(const std::vector<ingest::EventRecord>& events,
                        std::int64_t bucket_seconds = 3600, double jaccard_threshold = 0.6);

}  // namespace adrec::graph
