#pragma once

#include <cstdint>
#include <vector>

#include "adrec/graph/hetero_graph.hpp"
#include "adrec/graph/identity.hpp"
#include "adrec/ingest/event.hpp"

namespace adrec::train {

struct LabeledSample {
  int user = 0;      // unified user index
  int ad = 0;        // ad index in the graph
  double label = 0;  // 1 = clicked
  double weight = 1;
  int platform = 0;  // platform of the originating click (negatives inherit)
};

/// w_i = N / (2 * N_{y_i}): total weighted mass per class is equal. Throws
/// input_error when only one class is present.
std::vector<double> class_weights(const std::vector<int>& labels);

void apply_class_weights(std::vector<LabeledSample>& samples);

/// One positive per click; per positive, `ratio` ads drawn uniformly
/// without replacement from ads the user never clicked. A user who clicked
/// the whole catalog yields fewer negatives (warning to stderr, not an
/// error). Deterministic under seed.
std::vector<LabeledSample> negative_sample(const std::vector<ingest::EventRecord>& events,
                                           const graph::IdentityMap& identity,
                                           const graph::HeteroGraph& graph, int ratio,
                                           std::uint64_t seed);

struct SampleSplit {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> validation;
};

/// User-disjoint split: a user's samples land entirely on one side.
SampleSplit split_user_disjoint(const std::vector<LabeledSample>& samples, int user_count,
                                double val_fraction, std::uint64_t seed);

}  // namespace adrec::train
