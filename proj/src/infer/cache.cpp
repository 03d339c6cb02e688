#include "adrec/infer/cache.hpp"

namespace adrec::infer {

std::optional<num::Matrix> EmbedCache::get(int node, std::int64_t window_tag) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find({node, window_tag});
  if (it == index_.end()) return std::nullopt;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->embedding;
}

bool EmbedCache::put(int node, std::int64_t window_tag, num::Matrix embedding, int hop_depth) {
  if (hop_depth > kCacheMaxHop || capacity_ == 0) return false;
  std::lock_guard<std::mutex> lock(mu_);
  const Key key{node, window_tag};
  auto it = index_.find(key);
  if (it != index_.end()) {
    it->second->embedding = std::move(embedding);
    lru_.splice(lru_.begin(), lru_, it->second);
    return true;
  }
  lru_.push_front(Entry{node, window_tag, std::move(embedding)});
  index_[key] = lru_.begin();
  if (lru_.size() > capacity_) {
    const Entry& victim = lru_.back();
    index_.erase({victim.node, victim.tag});
    lru_.pop_back();
  }
  return true;
}

std::size_t EmbedCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return lru_.size();
}

}  // namespace adrec::infer
