#include "adrec/ingest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "adrec/error.hpp"
#include "adrec/numerics/matrix.hpp"

namespace adrec::ingest {

namespace {

constexpr int kClusterLabels = 3;   // labels per ad-type cluster
constexpr int kMaxLabelSet = 8;
constexpr int kSessionSpread = 5400;  // seconds of activity around a session start

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int n) {
  return static_cast<int>(uniform01(rng) * n) % n;
}

double gaussian(std::mt19937_64& rng) {
  // Box-Muller; deterministic across standard libraries.
  double u1 = uniform01(rng), u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<double> unit_vector(std::mt19937_64& rng, int dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = gaussian(rng);
    norm += x * x;
  }
  norm = std::sqrt(std::max(norm, 1e-12));
  for (auto& x : v) x /= norm;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct AdInfo {
  std::string id;
  int type = 0;
  std::vector<int> labels;
  std::vector<double> latent;
  double weight_index = 0.0;
};

struct UserSlot {
  int real_user = 0;
  std::string raw_id;
  std::string hashed_id;
  int n_events = 0;
};

}  // namespace

SyntheticSpec table3_spec(int users_per_platform, int ads_per_platform, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.platforms = {
      {"A", users_per_platform, ads_per_platform, std::min(28, ads_per_platform), 12.4, 2.3, -1.5},
      {"B", users_per_platform, ads_per_platform, std::min(24, ads_per_platform), 15.8, 1.7, -1.5},
      {"C", users_per_platform, ads_per_platform, std::min(37, ads_per_platform), 10.3, 3.1, -1.5},
  };
  return spec;
}

std::vector<EventRecord> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.platforms.empty()) throw input_error("synthetic spec: no platforms");
  for (const auto& p : spec.platforms) {
    if (p.users < 1 || p.ads < 1 || p.ad_types < 1)
      throw input_error("synthetic spec: counts must be >= 1 on platform " + p.platform_id);
    if (p.mean_seq_len <= 0.0 || p.label_density <= 0.0)
      throw input_error("synthetic spec: targets must be > 0 on platform " + p.platform_id);
    if (p.label_density > kMaxLabelSet)
      throw input_error("synthetic spec: label density " + std::to_string(p.label_density) +
                        " exceeds available labels per ad on platform " + p.platform_id);
    if (p.ads < p.ad_types)
      throw input_error("synthetic spec: fewer ads than ad types on platform " + p.platform_id);
  }
  if (spec.latent_dim < 1) throw input_error("synthetic spec: latent dimension must be >= 1");

  std::mt19937_64 rng(spec.seed);
  const int n_platforms = static_cast<int>(spec.platforms.size());

  // Real users. Cross-platform users occupy one slot on two platforms and
  // share session times so activity matching can link them.
  struct RealUser {
    std::vector<double> latent;
    std::string hash;
    bool shared_hash = true;
    std::vector<std::int64_t> sessions;
    std::vector<int> platforms;
  };
  std::vector<RealUser> users;
  std::vector<std::vector<int>> slots_of_platform(n_platforms);  // -> real user index

  for (int p = 0; p < n_platforms; ++p) {
    const auto& ps = spec.platforms[p];
    int remaining = ps.users;
    if (p > 0) {
      int want_cross = static_cast<int>(std::lround(spec.cross_platform_fraction * ps.users));
      // Extend users from earlier platforms that are still single-platform.
      std::vector<int> extendable;
      for (int u = 0; u < static_cast<int>(users.size()); ++u)
        if (users[u].platforms.size() == 1) extendable.push_back(u);
      for (int c = 0; c < want_cross && !extendable.empty() && remaining > 0; ++c) {
        const int pick = uniform_int(rng, static_cast<int>(extendable.size()));
        const int u = extendable[pick];
        extendable.erase(extendable.begin() + pick);
        users[u].platforms.push_back(p);
        slots_of_platform[p].push_back(u);
        --remaining;
      }
    }
    for (int k = 0; k < remaining; ++k) {
      RealUser u;
      u.latent = unit_vector(rng, spec.latent_dim);
      char hash[32];
      std::snprintf(hash, sizeof(hash), "h%016llx", static_cast<unsigned long long>(rng()));
      u.hash = hash;
      u.shared_hash = uniform01(rng) < spec.shared_hash_fraction;
      u.platforms.push_back(p);
      const int sessions = 5 + uniform_int(rng, 3);
      for (int s = 0; s < sessions; ++s)
        u.sessions.push_back(spec.start_time +
                             static_cast<std::int64_t>(uniform01(rng) * (spec.span_seconds - kSessionSpread)));
      std::sort(u.sessions.begin(), u.sessions.end());
      slots_of_platform[p].push_back(static_cast<int>(users.size()));
      users.push_back(std::move(u));
    }
  }

  // Ads per platform: types assigned round-robin so every category appears;
  // label sets come from a globally shared per-type cluster, so same-type
  // ads on different platforms overlap in labels.
  std::vector<std::vector<AdInfo>> ads_of_platform(n_platforms);
  for (int p = 0; p < n_platforms; ++p) {
    const auto& ps = spec.platforms[p];
    for (int i = 0; i < ps.ads; ++i) {
      AdInfo ad;
      ad.id = "ad_" + ps.platform_id + "_" + std::to_string(i);
      ad.type = i % ps.ad_types;
      const double d = ps.label_density;
      int size = static_cast<int>(std::floor(d));
      if (uniform01(rng) < d - std::floor(d)) ++size;
      size = std::max(1, std::min(size, kMaxLabelSet));
      for (int l = 0; l < size; ++l) ad.labels.push_back(ad.type * kClusterLabels + l);
      ad.latent = unit_vector(rng, spec.latent_dim);
      ad.weight_index = 10.0 + 90.0 * uniform01(rng);
      ads_of_platform[p].push_back(std::move(ad));
    }
  }

  std::vector<EventRecord> events;
  for (int p = 0; p < n_platforms; ++p) {
    const auto& ps = spec.platforms[p];
    const auto& ads = ads_of_platform[p];

    // Affinity-sorted ad order per user would cost users x ads x dim; done
    // lazily per event instead: biased choice toward high-affinity ads by
    // best-of-candidates sampling.
    for (int slot = 0; slot < static_cast<int>(slots_of_platform[p].size()); ++slot) {
      const int uidx = slots_of_platform[p][slot];
      RealUser& user = users[uidx];
      const std::string raw_id = "u" + ps.platform_id + "_" + std::to_string(slot);
      const std::string hashed =
          (user.platforms.size() > 1 && !user.shared_hash)
              ? user.hash + "_" + ps.platform_id
              : user.hash;

      int n_events = static_cast<int>(std::floor(ps.mean_seq_len));
      if (uniform01(rng) < ps.mean_seq_len - std::floor(ps.mean_seq_len)) ++n_events;
      n_events = std::max(1, n_events);

      std::map<std::string, int> exposures;
      for (int k = 0; k < n_events; ++k) {
        const int session = k % static_cast<int>(user.sessions.size());
        const std::int64_t ts =
            user.sessions[session] + static_cast<std::int64_t>(uniform01(rng) * kSessionSpread);

        // Pick an ad: mostly the higher-affinity of a few candidates, so the
        // planted preference shows up in exposure as well as in clicks.
        int ad_idx = uniform_int(rng, static_cast<int>(ads.size()));
        if (uniform01(rng) < 0.7) {
          for (int c = 0; c < 2; ++c) {
            const int other = uniform_int(rng, static_cast<int>(ads.size()));
            if (dot(user.latent, ads[other].latent) > dot(user.latent, ads[ad_idx].latent))
              ad_idx = other;
          }
        }
        const AdInfo& ad = ads[ad_idx];
        const double affinity = dot(user.latent, ad.latent);
        const double p_click = num::sigmoid(spec.affinity_scale * affinity + ps.click_bias);

        EventRecord e;
        e.platform_id = ps.platform_id;
        e.raw_user_id = raw_id;
        e.hashed_id = hashed;
        e.ad_id = ad.id;
        e.timestamp = ts;
        e.labels = ad.labels;
        const double roll = uniform01(rng);
        if (roll < p_click) e.action = Action::Click;
        else if (roll < p_click + 0.3 * (1.0 - p_click)) e.action = Action::Browse;
        else e.action = Action::View;

        const int repeat = exposures[ad.id]++;
        e.raw_attrs[kAttrTimestamp] = static_cast<double>(ts);
        e.raw_attrs[kAttrCcrGroup] = std::floor(p_click * 10.0);
        e.raw_attrs[kAttrAdWeightIndex] = ad.weight_index;
        e.raw_attrs[kAttrDwellTime] =
            (e.action == Action::Click ? 120.0 : 20.0) + 180.0 * uniform01(rng);
        e.raw_attrs[kAttrPositionIndex] = 1 + uniform_int(rng, 20);
        e.raw_attrs[kAttrSessionIndex] = session;
        e.raw_attrs[kAttrHourOfDay] = static_cast<double>((ts / 3600) % 24);
        e.raw_attrs[kAttrDayOfWeek] = static_cast<double>((ts / 86400) % 7);
        e.raw_attrs[kAttrRepeatExposure] = repeat;
        e.raw_attrs[kAttrScrollDepth] = uniform01(rng);
        e.raw_attrs[kAttrPlatformCode] = p;
        e.raw_attrs[kAttrLabelMatch] = (affinity + 1.0) / 2.0;
        events.push_back(std::move(e));
      }
    }
  }

  std::stable_sort(events.begin(), events.end(), [](const EventRecord& a, const EventRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.platform_id != b.platform_id) return a.platform_id < b.platform_id;
    if (a.raw_user_id != b.raw_user_id) return a.raw_user_id < b.raw_user_id;
    return a.ad_id < b.ad_id;
  });
  return events;
}

std::vector<PlatformStats> measure_stats(const std::vector<EventRecord>& events) {
  std::map<std::string, PlatformStats> by_platform;
  std::map<std::string, std::set<std::string>> users;
  std::map<std::string, std::set<int>> types_seen;  // via min label cluster
  std::map<std::string, std::map<std::string, std::size_t>> ad_labels;
  for (const auto& e : events) {
    auto& st = by_platform[e.platform_id];
    st.platform_id = e.platform_id;
    ++st.events;
    users[e.platform_id].insert(e.raw_user_id);
    if (!e.labels.empty())
      types_seen[e.platform_id].insert(*std::min_element(e.labels.begin(), e.labels.end()) / 3);
    ad_labels[e.platform_id][e.ad_id] = std::max(ad_labels[e.platform_id][e.ad_id], e.labels.size());
  }
  std::vector<PlatformStats> out;
  for (auto& [pid, st] : by_platform) {
    st.users = static_cast<int>(users[pid].size());
    st.mean_seq_len = st.users ? static_cast<double>(st.events) / st.users : 0.0;
    st.ad_types = static_cast<int>(types_seen[pid].size());
    double total = 0.0;
    for (const auto& [ad, n] : ad_labels[pid]) total += static_cast<double>(n);
    st.label_density = ad_labels[pid].empty() ? 0.0 : total / ad_labels[pid].size();
    out.push_back(st);
  }
  return out;
}

}  // namespace adrec::ingest
