#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "adrec/graph/hetero_graph.hpp"
#include "adrec/graph/identity.hpp"
#include "adrec/ingest/event.hpp"
#include "adrec/ingest/windowing.hpp"
#include "adrec/layers/gnn.hpp"
#include "adrec/train/metrics.hpp"
#include "adrec/train/sampling.hpp"

namespace adrec::train {

struct TrainConfig {
  int epochs = 300;
  double lr = 0.001;
  int batch = 128;
  int embed_dim = 64;
  int heads = 4;
  int time_dim = 8;
  std::int64_t dt_seconds = ingest::kWindow6h;
  double val_fraction = 0.2;
  int neg_ratio = 4;
  std::uint64_t seed = 1;

  layers::GnnConfig gnn() const {
    return layers::GnnConfig{embed_dim, heads, time_dim, dt_seconds};
  }
};

/// Full parameter copy (values and moments) at the minimum-validation-loss
/// epoch.
struct Snapshot {
  num::ParamStore params;
  layers::GnnConfig config;
  int epoch = -1;
  double val_loss = std::numeric_limits<double>::infinity();
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

/// Shared forward machinery: message graph, time encodings and per-user
/// step-readout plans are built once; every batch runs one full-graph stack
/// forward plus the batched sequential scorer.
class ModelEngine {
 public:
  ModelEngine(const graph::HeteroGraph& graph, const std::vector<ingest::EventRecord>& events,
              const graph::IdentityMap& identity, const layers::GnnConfig& config);

  std::vector<double> forward_probs(const num::ParamStore& params,
                                    const std::vector<LabeledSample>& samples) const;

  /// Mean weighted cross-entropy without gradients.
  double loss_of(const num::ParamStore& params, const std::vector<LabeledSample>& samples) const;

  /// Forward + backward + Adam over one batch; returns the batch mean loss.
  double train_step(num::ParamStore& params, const std::vector<LabeledSample>& batch,
                    double lr) const;

  num::Matrix node_embeddings(const num::ParamStore& params) const;

  const layers::GnnConfig& config() const { return config_; }
  const layers::MessageGraph& message_graph() const { return mg_; }
  std::vector<std::string> platform_names() const;
  const graph::HeteroGraph& graph() const { return *graph_; }

  /// Per-step user states for one user (rows = steps). Used by ranking.
  num::Matrix user_states(const num::ParamStore& params, int user) const;

 private:
  num::Tape::NodeId build_probs(num::Tape& tape, const num::ParamStore& params,
                                const std::vector<LabeledSample>& samples) const;

  const graph::HeteroGraph* graph_;
  layers::GnnConfig config_;
  layers::MessageGraph mg_;
  layers::ProjectionInput proj_;
  num::Matrix phi_;
  std::vector<layers::StepPlan> user_plans_;  // per unified user
};

struct TrainResult {
  Snapshot best;
  std::vector<EpochStats> trace;
  SampleSplit split;
};

/// Seeded end-to-end loop: negative sampling, user-disjoint split, per-epoch
/// shuffled mini-batches, Adam, min-validation-loss snapshotting (strict
/// improvement; ties keep the earliest epoch).
TrainResult train(const graph::HeteroGraph& graph, const std::vector<ingest::EventRecord>& events,
                  const graph::IdentityMap& identity, const TrainConfig& cfg);

MetricsReport evaluate(const Snapshot& snapshot, const graph::HeteroGraph& graph,
                       const std::vector<ingest::EventRecord>& events,
                       const graph::IdentityMap& identity,
                       const std::vector<LabeledSample>& samples, double threshold = 0.5);

void write_trace_csv(const std::vector<EpochStats>& trace, std::ostream& out);

void save_snapshot(const Snapshot& snapshot, const std::string& path);
Snapshot load_snapshot(const std::string& path);

}  // namespace adrec::train
