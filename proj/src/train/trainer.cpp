#include "adrec/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>

#include "adrec/error.hpp"
#include "adrec/ingest/windowing.hpp"
#include "adrec/scorer/scorer.hpp"
#include "json.hpp"

namespace adrec::train {

using num::GradMap;
using num::Matrix;
using num::ParamStore;
using num::Tape;

ModelEngine::ModelEngine(const graph::HeteroGraph& graph,
                         const std::vector<ingest::EventRecord>& events,
                         const graph::IdentityMap& identity, const layers::GnnConfig& config)
    : graph_(&graph), config_(config) {
  mg_ = layers::build_message_graph(graph, graph::sym_norm(graph), config.dt_seconds);
  proj_ = layers::projection_input(graph);
  phi_ = config.encoder().encode_rows(mg_.delta_t);

  auto sequences = ingest::window_sequences(events, identity, config.dt_seconds);
  user_plans_.resize(graph.users.size());
  for (const auto& seq : sequences) {
    layers::StepRequest req;
    req.node = seq.user;  // users occupy the first global rows
    for (const auto& w : seq.windows) req.windows.push_back(w.index);
    if (!req.windows.empty())
      user_plans_[seq.user] = layers::make_step_plan(mg_, config.encoder(), {req});
  }
}

std::vector<std::string> ModelEngine::platform_names() const {
  std::vector<std::string> names;
  for (const auto& p : graph_->platforms) names.push_back(p.platform_id);
  return names;
}

Tape::NodeId ModelEngine::build_probs(Tape& tape, const ParamStore& params,
                                      const std::vector<LabeledSample>& samples) const {
  auto stack = layers::stack_forward(tape, params, proj_, mg_, config_, &phi_);

  std::vector<int> users;
  users.reserve(samples.size());
  for (const auto& s : samples) users.push_back(s.user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());

  std::vector<const layers::StepPlan*> plans;
  std::vector<std::pair<int, int>> ranges;
  std::vector<int> user_of_row;
  std::vector<int> local_of_user(graph_->users.size(), -1);
  int row = 0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& plan = user_plans_[users[i]];
    if (plan.pairs == 0)
      throw input_error("user " + std::to_string(users[i]) + " has an empty sequence");
    plans.push_back(&plan);
    ranges.push_back({row, row + plan.pairs});
    for (int t = 0; t < plan.pairs; ++t) user_of_row.push_back(static_cast<int>(i));
    row += plan.pairs;
    local_of_user[users[i]] = static_cast<int>(i);
  }
  auto batch_plan = layers::concat_step_plans(plans);
  auto h_steps = layers::step_states(tape, stack.gat2_result.cache, batch_plan);

  std::vector<int> sample_user, sample_ad_row;
  sample_user.reserve(samples.size());
  sample_ad_row.reserve(samples.size());
  const int ad_offset = static_cast<int>(graph_->users.size());
  for (const auto& s : samples) {
    sample_user.push_back(local_of_user[s.user]);
    sample_ad_row.push_back(ad_offset + s.ad);
  }
  auto plan = scorer::make_score_plan(ranges, sample_user, sample_ad_row);
  auto scores = scorer::batch_scores(tape, params, h_steps, user_of_row, stack.final, plan);
  return scorer::predict_prob(tape, scores);
}

std::vector<double> ModelEngine::forward_probs(const ParamStore& params,
                                               const std::vector<LabeledSample>& samples) const {
  Tape tape;
  auto probs = build_probs(tape, params, samples);
  const Matrix& value = tape.value(probs);
  std::vector<double> out(value.rows());
  for (std::size_t i = 0; i < value.rows(); ++i) out[i] = value(i, 0);
  return out;
}

namespace {

void sample_targets(const std::vector<LabeledSample>& samples, Matrix& y, Matrix& w) {
  y = Matrix(samples.size(), 1);
  w = Matrix(samples.size(), 1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    y(i, 0) = samples[i].label;
    w(i, 0) = samples[i].weight;
  }
}

}  // namespace

double ModelEngine::loss_of(const ParamStore& params, const std::vector<LabeledSample>& samples) const {
  if (samples.empty()) throw input_error("loss_of: no samples");
  Tape tape;
  auto probs = build_probs(tape, params, samples);
  Matrix y, w;
  sample_targets(samples, y, w);
  auto loss = tape.weighted_bce(probs, std::move(y), std::move(w));
  return tape.value(loss)(0, 0) / static_cast<double>(samples.size());
}

double ModelEngine::train_step(ParamStore& params, const std::vector<LabeledSample>& batch,
                               double lr) const {
  Tape tape;
  auto probs = build_probs(tape, params, batch);
  Matrix y, w;
  sample_targets(batch, y, w);
  auto loss = tape.mul_scalar(tape.weighted_bce(probs, std::move(y), std::move(w)),
                              1.0 / static_cast<double>(batch.size()));
  GradMap grads = tape.backward(loss);
  adam_step(params, grads, lr);
  return tape.value(loss)(0, 0);
}

Matrix ModelEngine::node_embeddings(const ParamStore& params) const {
  Tape tape;
  auto stack = layers::stack_forward(tape, params, proj_, mg_, config_, &phi_);
  return tape.value(stack.final);
}

Matrix ModelEngine::user_states(const ParamStore& params, int user) const {
  const auto& plan = user_plans_[user];
  if (plan.pairs == 0) throw input_error("user " + std::to_string(user) + " has an empty sequence");
  Tape tape;
  auto stack = layers::stack_forward(tape, params, proj_, mg_, config_, &phi_);
  auto states = layers::step_states(tape, stack.gat2_result.cache, plan);
  return tape.value(states);
}

TrainResult train(const graph::HeteroGraph& graph, const std::vector<ingest::EventRecord>& events,
                  const graph::IdentityMap& identity, const TrainConfig& cfg) {
  ModelEngine engine(graph, events, identity, cfg.gnn());

  auto samples = negative_sample(events, identity, graph, cfg.neg_ratio, cfg.seed + 1);
  if (samples.empty()) throw input_error("train: no labeled samples (no click events)");
  TrainResult result;
  result.split = split_user_disjoint(samples, static_cast<int>(graph.users.size()),
                                     cfg.val_fraction, cfg.seed + 2);
  auto& tr = result.split.train;
  auto& va = result.split.validation;
  if (tr.empty() || va.empty()) throw input_error("train: empty train or validation split");

  // Class weights fitted on the training split and reused for validation so
  // the snapshot criterion is consistent across epochs.
  {
    std::size_t pos = 0;
    for (const auto& s : tr) pos += s.label > 0.5 ? 1 : 0;
    if (pos == 0 || pos == tr.size())
      throw input_error("train: both classes must be present in the training split");
    const double n = static_cast<double>(tr.size());
    const double w_pos = n / (2.0 * static_cast<double>(pos));
    const double w_neg = n / (2.0 * static_cast<double>(tr.size() - pos));
    for (auto& s : tr) s.weight = s.label > 0.5 ? w_pos : w_neg;
    for (auto& s : va) s.weight = s.label > 0.5 ? w_pos : w_neg;
  }

  ParamStore params;
  layers::init_model_params(params, cfg.gnn(), cfg.seed);

  result.best.config = cfg.gnn();
  result.best.params = params;
  result.best.epoch = -1;

  std::mt19937_64 shuffle_rng(cfg.seed + 3);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(tr.begin(), tr.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t off = 0; off < tr.size(); off += cfg.batch, ++batch_index) {
      const std::size_t end = std::min(tr.size(), off + cfg.batch);
      std::vector<LabeledSample> batch(tr.begin() + off, tr.begin() + end);
      try {
        epoch_loss += engine.train_step(params, batch, cfg.lr) * static_cast<double>(batch.size());
      } catch (const Error& e) {
        if (e.kind() == ErrKind::Numeric)
          throw numeric_error("epoch " + std::to_string(epoch) + " batch " +
                              std::to_string(batch_index) + ": " + e.what());
        throw;
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(tr.size());
    stats.val_loss = engine.loss_of(params, va);
    result.trace.push_back(stats);
    if (stats.val_loss < result.best.val_loss) {
      result.best.params = params;
      result.best.epoch = epoch;
      result.best.val_loss = stats.val_loss;
    }
  }
  return result;
}

MetricsReport evaluate(const Snapshot& snapshot, const graph::HeteroGraph& graph,
                       const std::vector<ingest::EventRecord>& events,
                       const graph::IdentityMap& identity,
                       const std::vector<LabeledSample>& samples, double threshold) {
  ModelEngine engine(graph, events, identity, snapshot.config);
  auto probs = engine.forward_probs(snapshot.params, samples);
  std::vector<int> labels(samples.size());
  std::vector<int> tags(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    labels[i] = samples[i].label > 0.5 ? 1 : 0;
    tags[i] = samples[i].platform;
  }
  return compute_metrics(probs, labels, tags, engine.platform_names(), threshold);
}

void write_trace_csv(const std::vector<EpochStats>& trace, std::ostream& out) {
  out << "epoch,train_loss,val_loss\n";
  char buf[64];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_loss);
    out << buf;
  }
}

namespace {

nlohmann::ordered_json matrix_to_json(const Matrix& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["values"] = m.values();
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix::from_rows(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                           j.at("values").get<std::vector<double>>());
}

}  // namespace

void save_snapshot(const Snapshot& snapshot, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "adrec-snapshot-v1";
  j["config"] = {{"embed_dim", snapshot.config.embed_dim},
                 {"heads", snapshot.config.heads},
                 {"time_dim", snapshot.config.time_dim},
                 {"dt_seconds", snapshot.config.dt_seconds}};
  j["epoch"] = snapshot.epoch;
  if (std::isfinite(snapshot.val_loss))
    j["val_loss"] = snapshot.val_loss;
  else
    j["val_loss"] = nullptr;
  j["step"] = snapshot.params.step();
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, entry] : snapshot.params.entries()) {
    nlohmann::ordered_json p;
    p["value"] = matrix_to_json(entry.value);
    p["m"] = matrix_to_json(entry.m);
    p["v"] = matrix_to_json(entry.v);
    params[name] = p;
  }
  j["params"] = params;
  std::ofstream out(path);
  if (!out) throw input_error("cannot write snapshot: " + path);
  out << j.dump(1) << '\n';
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot read snapshot: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("bad snapshot file " + path + ": " + e.what());
  }
  if (j.value("format", "") != "adrec-snapshot-v1")
    throw input_error("unrecognized snapshot format in " + path);
  Snapshot s;
  s.config.embed_dim = j.at("config").at("embed_dim").get<int>();
  s.config.heads = j.at("config").at("heads").get<int>();
  s.config.time_dim = j.at("config").at("time_dim").get<int>();
  s.config.dt_seconds = j.at("config").at("dt_seconds").get<std::int64_t>();
  s.epoch = j.at("epoch").get<int>();
  s.val_loss = j.at("val_loss").is_null() ? std::numeric_limits<double>::infinity()
                                          : j.at("val_loss").get<double>();
  for (const auto& [name, pj] : j.at("params").items()) {
    s.params.create(name, matrix_from_json(pj.at("value")));
    s.params.entries().at(name).m = matrix_from_json(pj.at("m"));
    s.params.entries().at(name).v = matrix_from_json(pj.at("v"));
  }
  s.params.set_step(j.at("step").get<std::int64_t>());
  return s;
}

}  // namespace adrec::train
