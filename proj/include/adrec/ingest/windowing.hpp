#pragma once

#include <cstdint>
#include <vector>

#include "adrec/graph/identity.hpp"
#include "adrec/ingest/event.hpp"

namespace adrec::ingest {

inline constexpr std::int64_t kWindow2h = 2 * 3600;
inline constexpr std::int64_t kWindow6h = 6 * 3600;
inline constexpr std::int64_t kWindow12h = 12 * 3600;

/// One user's events partitioned into ascending time windows of width
/// dt_seconds; window index = floor(timestamp / dt).
struct WindowedSequence {
  int user = 0;  // unified index
  std::int64_t dt_seconds = kWindow6h;

  struct Window {
    std::int64_t index = 0;
    std::vector<int> event_ids;  // indices into the source event vector
  };
  std::vector<Window> windows;
};

/// Per-user sequences ordered by unified index; events within a window are
/// sorted by (timestamp, ad_id). Every event lands in exactly one window.
std::vector<WindowedSequence> window_sequences(const std::vector<EventRecord>& events,
                                               const graph::IdentityMap& identity,
                                               std::int64_t dt_seconds);

}  // namespace adrec::ingest
