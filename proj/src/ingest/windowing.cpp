#include "adrec/ingest/windowing.hpp"

#include <algorithm>
#include <map>

namespace adrec::ingest {

std::vector<WindowedSequence> window_sequences(const std::vector<EventRecord>& events,
                                               const graph::IdentityMap& identity,
                                               std::int64_t dt_seconds) {
  std::vector<std::map<std::int64_t, std::vector<int>>> per_user(identity.user_count);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const int u = identity.index_of(e.platform_id, e.raw_user_id);
    per_user[u][e.timestamp / dt_seconds].push_back(static_cast<int>(i));
  }
  std::vector<WindowedSequence> out;
  out.reserve(per_user.size());
  for (int u = 0; u < identity.user_count; ++u) {
    WindowedSequence seq;
    seq.user = u;
    seq.dt_seconds = dt_seconds;
    for (auto& [idx, ids] : per_user[u]) {
      std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        if (events[a].timestamp != events[b].timestamp)
          return events[a].timestamp < events[b].timestamp;
        if (events[a].ad_id != events[b].ad_id) return events[a].ad_id < events[b].ad_id;
        return a < b;
      });
      seq.windows.push_back({idx, std::move(ids)});
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace adrec::ingest
