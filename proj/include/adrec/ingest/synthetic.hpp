#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adrec/ingest/event.hpp"

namespace adrec::ingest {

/// Targets for one synthetic platform section.
struct PlatformSpec {
  std::string platform_id;
  int users = 0;
  int ads = 0;      // distinct ads in the pool
  int ad_types = 0; // distinct ad categories
  double mean_seq_len = 0.0;   // target events per user on this platform
  double label_density = 0.0;  // target mean labels per ad
  double click_bias = -1.5;    // platform intercept of the click model
};

/// Planted-preference generator: users and ads carry latent unit vectors;
/// click probability is sigmoid(affinity_scale * <u, a> + platform bias).
/// A fraction of users appears on two platforms, sharing a hashed id for
/// part of them (the rest link only through activity matching).
struct SyntheticSpec {
  std::vector<PlatformSpec> platforms;
  int latent_dim = 8;
  double affinity_scale = 8.0;
  double cross_platform_fraction = 0.3;
  double shared_hash_fraction = 0.7;
  std::int64_t start_time = 1700000000;
  std::int64_t span_seconds = 2 * 86400;
  std::uint64_t seed = 1;
};

/// Per-platform statistics of a generated (or any) event log, mirroring the
/// sequence-length / ad-type / label-density columns of the evaluation table.
struct PlatformStats {
  std::string platform_id;
  int users = 0;
  int events = 0;
  double mean_seq_len = 0.0;
  int ad_types = 0;
  double label_density = 0.0;
};

/// Spec with three platforms whose sequence-length / ad-type / label-density
/// targets are 12.4 / 28 / 2.3, 15.8 / 24 / 1.7 and 10.3 / 37 / 3.1.
SyntheticSpec table3_spec(int users_per_platform = 700, int ads_per_platform = 150,
                          std::uint64_t seed = 1);

/// Deterministic under spec.seed; output sorted by timestamp. Throws
/// input_error for infeasible targets.
std::vector<EventRecord> generate_synthetic(const SyntheticSpec& spec);

std::vector<PlatformStats> measure_stats(const std::vector<EventRecord>& events);

}  // namespace adrec::ingest
