#include "adrec/train/sampling.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <random>
#include <set>

#include "adrec/error.hpp"

namespace adrec::train {

std::vector<double> class_weights(const std::vector<int>& labels) {
  std::size_t pos = 0;
  for (int y : labels) pos += y ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0)
    throw input_error("class_weights: both classes must be present");
  const double n = static_cast<double>(labels.size());
  const double w_pos = n / (2.0 * static_cast<double>(pos));
  const double w_neg = n / (2.0 * static_cast<double>(neg));
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = labels[i] ? w_pos : w_neg;
  return w;
}

void apply_class_weights(std::vector<LabeledSample>& samples) {
  std::vector<int> labels(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label > 0.5 ? 1 : 0;
  auto w = class_weights(labels);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].weight = w[i];
}

std::vector<LabeledSample> negative_sample(const std::vector<ingest::EventRecord>& events,
                                           const graph::IdentityMap& identity,
                                           const graph::HeteroGraph& graph, int ratio,
                                           std::uint64_t seed) {
  if (ratio < 1) throw input_error("negative_sample: ratio must be >= 1");
  std::map<std::string, int> ad_ids;
  for (std::size_t a = 0; a < graph.ads.size(); ++a) ad_ids[graph.ads[a].ad_id] = static_cast<int>(a);
  std::map<std::string, int> platform_ids;
  for (std::size_t p = 0; p < graph.platforms.size(); ++p)
    platform_ids[graph.platforms[p].platform_id] = static_cast<int>(p);

  std::vector<std::set<int>> clicked(graph.users.size());
  for (const auto& e : events) {
    if (e.action != ingest::Action::Click) continue;
    clicked[identity.index_of(e.platform_id, e.raw_user_id)].insert(ad_ids.at(e.ad_id));
  }

  const int catalog = static_cast<int>(graph.ads.size());
  std::mt19937_64 rng(seed);
  std::vector<LabeledSample> out;
  bool warned = false;
  for (const auto& e : events) {
    if (e.action != ingest::Action::Click) continue;
    const int u = identity.index_of(e.platform_id, e.raw_user_id);
    const int a = ad_ids.at(e.ad_id);
    const int p = platform_ids.at(e.platform_id);
    out.push_back({u, a, 1.0, 1.0, p});

    const int unclicked = catalog - static_cast<int>(clicked[u].size());
    const int want = std::min(ratio, unclicked);
    if (want < ratio && !warned) {
      std::cerr << "negative_sample: user " << u << " clicked most of the catalog; "
                << "emitting fewer negatives\n";
      warned = true;
    }
    std::set<int> drawn;
    while (static_cast<int>(drawn.size()) < want) {
      const int cand = static_cast<int>(rng() % static_cast<std::uint64_t>(catalog));
      if (clicked[u].count(cand) || !drawn.insert(cand).second) continue;
      out.push_back({u, cand, 0.0, 1.0, p});
    }
  }
  return out;
}

SampleSplit split_user_disjoint(const std::vector<LabeledSample>& samples, int user_count,
                                double val_fraction, std::uint64_t seed) {
  if (val_fraction <= 0.0 || val_fraction >= 1.0)
    throw input_error("split: validation fraction must be in (0, 1)");
  std::vector<int> users(user_count);
  std::iota(users.begin(), users.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(users.begin(), users.end(), rng);
  const std::size_t n_val = static_cast<std::size_t>(val_fraction * user_count);
  std::vector<char> is_val(user_count, 0);
  for (std::size_t i = 0; i < n_val; ++i) is_val[users[i]] = 1;

  SampleSplit split;
  for (const auto& s : samples) {
    (is_val[s.user] ? split.validation : split.train).push_back(s);
  }
  return split;
}

}  // namespace adrec::train
