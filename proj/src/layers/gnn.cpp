#include "adrec/layers/gnn.hpp"

#include <cmath>
#include <random>

#include "adrec/error.hpp"

namespace adrec::layers {

using num::Activation;
using num::Matrix;
using num::ParamStore;
using num::Tape;

namespace {

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

Matrix glorot(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = (2.0 * uniform01(rng) - 1.0) * limit;
  return m;
}

}  // namespace

void init_model_params(ParamStore& params, const GnnConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int d = config.embed_dim;
  const int dt = config.time_dim;
  if (d % config.heads != 0) throw input_error("embed_dim must be divisible by head count");

  params.create("proj.user.W", glorot(rng, graph::kUserFeatures, d));
  params.create("proj.user.b", Matrix::zeros(1, d));
  params.create("proj.ad.W", glorot(rng, graph::kAdFeatures, d));
  params.create("proj.ad.b", Matrix::zeros(1, d));
  params.create("proj.platform.W", glorot(rng, graph::kPlatformFeatures, d));
  params.create("proj.platform.b", Matrix::zeros(1, d));

  params.create("gcn1.W", glorot(rng, d, d));

  const int hd1 = d / config.heads;
  for (int k = 0; k < config.heads; ++k) {
    const std::string h = "gat1.h" + std::to_string(k);
    params.create(h + ".W", glorot(rng, d, hd1));
    params.create(h + ".a", glorot(rng, 2 * hd1 + dt, 1));
  }
  for (int k = 0; k < config.heads; ++k) {
    const std::string h = "gat2.h" + std::to_string(k);
    params.create(h + ".W", glorot(rng, d, d));
    params.create(h + ".a", glorot(rng, 2 * d + dt, 1));
  }

  params.create("scorer.q", glorot(rng, d, 1));
  params.create("scorer.ffn.W1", glorot(rng, 2 * d, d));
  params.create("scorer.ffn.b1", Matrix::zeros(1, d));
  params.create("scorer.ffn.W2", glorot(rng, d, 1));
  params.create("scorer.ffn.b2", Matrix::zeros(1, 1));
}

ProjectionInput projection_input(const graph::HeteroGraph& graph) {
  ProjectionInput in;
  in.user_feats = Matrix(graph.users.size(), graph::kUserFeatures);
  for (std::size_t i = 0; i < graph.users.size(); ++i)
    for (int j = 0; j < graph::kUserFeatures; ++j)
      in.user_feats(i, j) = graph.users[i].features[j];
  in.ad_feats = Matrix(graph.ads.size(), graph::kAdFeatures);
  for (std::size_t i = 0; i < graph.ads.size(); ++i)
    for (int j = 0; j < graph::kAdFeatures; ++j) in.ad_feats(i, j) = graph.ads[i].features[j];
  in.platform_feats = Matrix(graph.platforms.size(), graph::kPlatformFeatures);
  for (std::size_t i = 0; i < graph.platforms.size(); ++i)
    for (int j = 0; j < graph::kPlatformFeatures; ++j)
      in.platform_feats(i, j) = graph.platforms[i].features[j];
  return in;
}

Tape::NodeId project_inputs(Tape& tape, const ParamStore& params, const ProjectionInput& input) {
  std::vector<Tape::NodeId> parts;
  if (input.user_feats.rows() > 0) {
    auto x = tape.constant(input.user_feats);
    parts.push_back(
        tape.add_row(tape.matmul(x, tape.param(params, "proj.user.W")), tape.param(params, "proj.user.b")));
  }
  if (input.ad_feats.rows() > 0) {
    auto x = tape.constant(input.ad_feats);
    parts.push_back(
        tape.add_row(tape.matmul(x, tape.param(params, "proj.ad.W")), tape.param(params, "proj.ad.b")));
  }
  if (input.platform_feats.rows() > 0) {
    auto x = tape.constant(input.platform_feats);
    parts.push_back(tape.add_row(tape.matmul(x, tape.param(params, "proj.platform.W")),
                                 tape.param(params, "proj.platform.b")));
  }
  if (parts.empty()) throw input_error("project_inputs: no nodes");
  auto kind_major = parts.size() == 1 ? parts[0] : tape.concat_rows(parts);
  if (input.local_of_row.empty()) return kind_major;

  // Scatter kind-major rows into the caller's node order.
  std::vector<int> row_of_local(input.local_of_row.size());
  for (std::size_t r = 0; r < input.local_of_row.size(); ++r)
    row_of_local[input.local_of_row[r]] = static_cast<int>(r);
  return tape.gather_rows(kind_major, row_of_local);
}

Tape::NodeId gcn_forward(Tape& tape, const ParamStore& params, const std::string& name,
                         Tape::NodeId h_in, const MessageGraph& mg) {
  auto zw = tape.matmul(h_in, tape.param(params, name + ".W"));
  std::vector<num::SparseEntry> entries;
  entries.reserve(mg.message_count());
  for (std::size_t i = 0; i < mg.message_count(); ++i)
    entries.push_back({mg.dst[i], mg.src[i], mg.coeff[i] * mg.weight[i]});
  auto agg = tape.spmm(std::move(entries), zw, mg.n);
  return tape.activate(agg, Activation::Relu);
}

GatResult gat_forward(Tape& tape, const ParamStore& params, const std::string& name,
                      Tape::NodeId h_in, const MessageGraph& mg, const TimeEncoder& encoder,
                      int heads, int head_dim, Combine combine, bool relu_output,
                      const Matrix* phi_rows) {
  GatResult result;
  result.cache.head_dim = head_dim;
  result.cache.heads = heads;

  auto phi = tape.constant(phi_rows ? *phi_rows : encoder.encode_rows(mg.delta_t));
  const std::vector<int>& src = mg.src;
  const std::vector<int>& dst = mg.dst;

  std::vector<Tape::NodeId> head_outputs;
  for (int k = 0; k < heads; ++k) {
    const std::string h = name + ".h" + std::to_string(k);
    auto w = tape.param(params, h + ".W");
    auto a = tape.param(params, h + ".a");
    auto zw = tape.matmul(h_in, w);
    auto a_dst = tape.slice_rows(a, 0, head_dim);
    auto a_src = tape.slice_rows(a, head_dim, head_dim);
    auto a_time = tape.slice_rows(a, 2 * head_dim, encoder.dim);
    auto s_dst = tape.matmul(zw, a_dst);
    auto s_src = tape.matmul(zw, a_src);

    auto logits = tape.add(tape.add(tape.gather_rows(s_dst, dst), tape.gather_rows(s_src, src)),
                           tape.matmul(phi, a_time));
    logits = tape.activate(logits, Activation::LeakyRelu);
    auto alpha = tape.segment_softmax(logits, dst);
    auto messages = tape.scale_rows(tape.gather_rows(zw, src), alpha);
    head_outputs.push_back(tape.scatter_add_rows(messages, dst, mg.n));

    result.alpha.push_back(alpha);
    result.cache.zw.push_back(zw);
    result.cache.s_dst.push_back(s_dst);
    result.cache.s_src.push_back(s_src);
    result.cache.a_time.push_back(a_time);
  }

  Tape::NodeId combined;
  if (combine == Combine::Concat) {
    combined = heads == 1 ? head_outputs[0] : tape.concat_cols(head_outputs);
  } else {
    combined = head_outputs[0];
    for (int k = 1; k < heads; ++k) combined = tape.add(combined, head_outputs[k]);
    combined = tape.mul_scalar(combined, 1.0 / heads);
  }
  result.h = relu_output ? tape.activate(combined, Activation::Relu) : combined;
  return result;
}

StackResult stack_forward(Tape& tape, const ParamStore& params, const ProjectionInput& input,
                          const MessageGraph& mg, const GnnConfig& config,
                          const Matrix* phi_rows) {
  StackResult out;
  const TimeEncoder encoder = config.encoder();
  Matrix phi_local;
  if (!phi_rows) {
    phi_local = encoder.encode_rows(mg.delta_t);
    phi_rows = &phi_local;
  }
  out.projected = project_inputs(tape, params, input);
  out.gcn = gcn_forward(tape, params, "gcn1", out.projected, mg);
  out.gat1_result = gat_forward(tape, params, "gat1", out.gcn, mg, encoder, config.heads,
                                config.embed_dim / config.heads, Combine::Concat, true, phi_rows);
  out.gat1 = out.gat1_result.h;
  out.gat2_result = gat_forward(tape, params, "gat2", out.gat1, mg, encoder, config.heads,
                                config.embed_dim, Combine::Mean, false, phi_rows);
  out.final = out.gat2_result.h;
  return out;
}

StepPlan make_step_plan(const MessageGraph& mg, const TimeEncoder& encoder,
                        const std::vector<StepRequest>& requests) {
  if (requests.empty()) throw input_error("make_step_plan: no requests");
  StepPlan plan;
  std::vector<double> offsets;
  for (const auto& req : requests) {
    for (std::int64_t w : req.windows) {
      const std::int64_t horizon = (w + 1) * mg.dt_seconds;
      for (int m = mg.in_begin[req.node]; m < mg.in_end[req.node]; ++m) {
        if (mg.window[m] > w) continue;
        plan.src.push_back(mg.src[m]);
        plan.dst.push_back(req.node);
        plan.seg.push_back(plan.pairs);
        offsets.push_back(mg.origin[m] < 0
                              ? 0.0
                              : std::max(0.0, static_cast<double>(horizon - mg.ts[m])));
      }
      ++plan.pairs;
    }
  }
  plan.phi = encoder.encode_rows(offsets);
  return plan;
}

StepPlan concat_step_plans(const std::vector<const StepPlan*>& plans) {
  StepPlan out;
  std::size_t rows = 0;
  for (const auto* p : plans) rows += p->src.size();
  out.src.reserve(rows);
  out.dst.reserve(rows);
  out.seg.reserve(rows);
  std::size_t dim = plans.empty() ? 0 : plans[0]->phi.cols();
  out.phi = Matrix(rows, dim);
  std::size_t row = 0;
  for (const auto* p : plans) {
    for (std::size_t i = 0; i < p->src.size(); ++i) {
      out.src.push_back(p->src[i]);
      out.dst.push_back(p->dst[i]);
      out.seg.push_back(p->seg[i] + out.pairs);
    }
    std::copy(p->phi.data(), p->phi.data() + p->phi.size(), out.phi.row(row));
    row += p->phi.rows();
    out.pairs += p->pairs;
  }
  return out;
}

Tape::NodeId step_states(Tape& tape, const GatCache& cache, const StepPlan& plan) {
  auto phi = tape.constant(plan.phi);
  Tape::NodeId sum = -1;
  for (int k = 0; k < cache.heads; ++k) {
    auto logits = tape.add(
        tape.add(tape.gather_rows(cache.s_dst[k], plan.dst), tape.gather_rows(cache.s_src[k], plan.src)),
        tape.matmul(phi, cache.a_time[k]));
    logits = tape.activate(logits, Activation::LeakyRelu);
    auto alpha = tape.segment_softmax(logits, plan.seg);
    auto messages = tape.scale_rows(tape.gather_rows(cache.zw[k], plan.src), alpha);
    auto agg = tape.scatter_add_rows(messages, plan.seg, plan.pairs);
    sum = k == 0 ? agg : tape.add(sum, agg);
  }
  return tape.mul_scalar(sum, 1.0 / cache.heads);
}

Tape::NodeId step_states(Tape& tape, const MessageGraph& mg, const TimeEncoder& encoder,
                         const GatCache& cache, const std::vector<StepRequest>& requests) {
  return step_states(tape, cache, make_step_plan(mg, encoder, requests));
}

}  // namespace adrec::layers
