#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <mutex>
#include <optional>

#include "adrec/numerics/matrix.hpp"

namespace adrec::infer {

inline constexpr int kCacheMaxHop = 2;

/// Bounded node -> embedding map keyed by (node, window tag) with LRU
/// eviction. Entries deeper than 2 hops are never stored; a get with a
/// different window tag never matches. get/put are individually atomic.
class EmbedCache {
 public:
  explicit EmbedCache(std::size_t capacity) : capacity_(capacity) {}

  /// Returns the cached row and refreshes its recency, or nothing.
  std::optional<num::Matrix> get(int node, std::int64_t window_tag);

  /// Stores embeddings computed at hop depth <= 2; deeper entries are
  /// dropped (returns false). Evicts the least-recently-used entry at
  /// capacity.
  bool put(int node, std::int64_t window_tag, num::Matrix embedding, int hop_depth);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  struct Entry {
    int node;
    std::int64_t tag;
    num::Matrix embedding;
  };
  using Key = std::pair<int, std::int64_t>;

  std::list<Entry> lru_;  // front = most recently used
  std::map<Key, std::list<Entry>::iterator> index_;
  std::size_t capacity_;
  mutable std::mutex mu_;
};

}  // namespace adrec::infer
