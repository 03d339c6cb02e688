#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adrec/graph/hetero_graph.hpp"
#include "adrec/layers/message_graph.hpp"
#include "adrec/layers/time_encoder.hpp"
#include "adrec/numerics/param_store.hpp"
#include "adrec/numerics/tape.hpp"

namespace adrec::layers {

enum class Combine { Concat, Mean };

struct GnnConfig {
  int embed_dim = 64;  // shared embedding width d; one of {64, 128, 256}
  int heads = 4;       // GAT head count; one of {4, 8, 12}
  int time_dim = 8;    // sinusoidal time-encoding width (even)
  std::int64_t dt_seconds = 21600;

  TimeEncoder encoder() const { return TimeEncoder{time_dim, dt_seconds}; }
};

/// Creates every trainable parameter of the model (projections, GCN, two
/// temporal GAT layers, sequential scorer) with seeded Glorot-uniform init.
void init_model_params(num::ParamStore& params, const GnnConfig& config, std::uint64_t seed);

/// Kind-major feature blocks plus the mapping from kind-major row to the
/// caller's node order (empty = already kind-major: users, ads, platforms).
struct ProjectionInput {
  num::Matrix user_feats;
  num::Matrix ad_feats;
  num::Matrix platform_feats;
  std::vector<int> local_of_row;
};

ProjectionInput projection_input(const graph::HeteroGraph& graph);

/// Per-kind affine maps into the shared embedding space; rows in the
/// caller's node order.
num::Tape::NodeId project_inputs(num::Tape& tape, const num::ParamStore& params,
                                 const ProjectionInput& input);

/// h_v = relu(sum over incoming messages of coeff * weight * W h_u), with
/// self-loops in the message graph.
num::Tape::NodeId gcn_forward(num::Tape& tape, const num::ParamStore& params, const std::string& name,
                              num::Tape::NodeId h_in, const MessageGraph& mg);

/// Per-head intermediates reused by the temporal step readout.
struct GatCache {
  std::vector<num::Tape::NodeId> zw;     // n x head_dim
  std::vector<num::Tape::NodeId> s_dst;  // n x 1, dst-role attention score
  std::vector<num::Tape::NodeId> s_src;  // n x 1, src-role attention score
  std::vector<num::Tape::NodeId> a_time; // time_dim x 1 slice of the attention vector
  int head_dim = 0;
  int heads = 0;
};

struct GatResult {
  num::Tape::NodeId h = -1;
  std::vector<num::Tape::NodeId> alpha;  // per head: message_count x 1, message order
  GatCache cache;
};

/// Multi-head attention over incoming messages with a time-encoding slot in
/// the logit; softmax per destination node (self-loop included). Concat
/// combine keeps per-head width head_dim and outputs heads*head_dim; Mean
/// averages full-width heads. `phi_rows`, when given, must be the
/// precomputed encoder.encode_rows(mg.delta_t).
GatResult gat_forward(num::Tape& tape, const num::ParamStore& params, const std::string& name,
                      num::Tape::NodeId h_in, const MessageGraph& mg, const TimeEncoder& encoder,
                      int heads, int head_dim, Combine combine, bool relu_output,
                      const num::Matrix* phi_rows = nullptr);

struct StackResult {
  num::Tape::NodeId projected = -1;
  num::Tape::NodeId gcn = -1;
  num::Tape::NodeId gat1 = -1;
  num::Tape::NodeId final = -1;  // n x embed_dim node embeddings
  GatResult gat1_result;
  GatResult gat2_result;
};

/// Projection -> GCN -> GAT (concat heads, relu) -> GAT (mean heads,
/// identity): global aggregation first, temporal attention on top.
StackResult stack_forward(num::Tape& tape, const num::ParamStore& params, const ProjectionInput& input,
                          const MessageGraph& mg, const GnnConfig& config,
                          const num::Matrix* phi_rows = nullptr);

inline constexpr int kStackDepth = 3;

/// One user's per-step state windows (ascending).
struct StepRequest {
  int node = 0;
  std::vector<std::int64_t> windows;
};

/// Precomputed readout expansion: one segment per (request, step) pair over
/// the node's incoming messages restricted to windows <= the step window;
/// time offsets run from the end of the step window.
struct StepPlan {
  std::vector<int> src, dst, seg;
  num::Matrix phi;
  int pairs = 0;
};

StepPlan make_step_plan(const MessageGraph& mg, const TimeEncoder& encoder,
                        const std::vector<StepRequest>& requests);

StepPlan concat_step_plans(const std::vector<const StepPlan*>& plans);

/// Final-layer attention aggregation per plan segment; returns
/// plan.pairs x embed_dim rows, request-major then step-major — the
/// sequential user states h_t.
num::Tape::NodeId step_states(num::Tape& tape, const GatCache& cache, const StepPlan& plan);

num::Tape::NodeId step_states(num::Tape& tape, const MessageGraph& mg, const TimeEncoder& encoder,
                              const GatCache& cache, const std::vector<StepRequest>& requests);

}  // namespace adrec::layers
