#include "adrec/scorer/scorer.hpp"

#include <algorithm>
#include <numeric>

#include "adrec/error.hpp"

namespace adrec::scorer {

using num::Activation;
using num::Tape;

Tape::NodeId step_weights(Tape& tape, const num::ParamStore& params, Tape::NodeId h_steps,
                          const std::vector<int>& user_of_row) {
  auto logits = tape.matmul(h_steps, tape.param(params, "scorer.q"));
  return tape.segment_softmax(logits, user_of_row);
}

Tape::NodeId ffn_scores(Tape& tape, const num::ParamStore& params, Tape::NodeId x) {
  auto hidden = tape.activate(
      tape.add_row(tape.matmul(x, tape.param(params, "scorer.ffn.W1")),
                   tape.param(params, "scorer.ffn.b1")),
      Activation::Relu);
  return tape.add_row(tape.matmul(hidden, tape.param(params, "scorer.ffn.W2")),
                      tape.param(params, "scorer.ffn.b2"));
}

ScorePlan make_score_plan(const std::vector<std::pair<int, int>>& user_row_range,
                          const std::vector<int>& sample_user,
                          const std::vector<int>& sample_ad_row) {
  if (sample_user.size() != sample_ad_row.size())
    throw shape_error("make_score_plan: sample vectors disagree");
  ScorePlan plan;
  plan.n_samples = sample_user.size();
  for (std::size_t s = 0; s < sample_user.size(); ++s) {
    const auto [begin, end] = user_row_range[sample_user[s]];
    if (begin >= end) throw input_error("make_score_plan: user has an empty sequence");
    for (int r = begin; r < end; ++r) {
      plan.step_rows.push_back(r);
      plan.ad_rows.push_back(sample_ad_row[s]);
      plan.sample_ids.push_back(static_cast<int>(s));
    }
  }
  return plan;
}

Tape::NodeId batch_scores(Tape& tape, const num::ParamStore& params, Tape::NodeId h_steps,
                          const std::vector<int>& user_of_row, Tape::NodeId embeddings,
                          const ScorePlan& plan) {
  auto alpha = step_weights(tape, params, h_steps, user_of_row);
  auto x = tape.concat_cols(
      {tape.gather_rows(h_steps, plan.step_rows), tape.gather_rows(embeddings, plan.ad_rows)});
  auto f = ffn_scores(tape, params, x);
  auto weighted = tape.mul_elem(f, tape.gather_rows(alpha, plan.step_rows));
  return tape.scatter_add_rows(weighted, plan.sample_ids, plan.n_samples);
}

Tape::NodeId score_sequence(Tape& tape, const num::ParamStore& params, Tape::NodeId h_steps,
                            Tape::NodeId embeddings, int ad_row) {
  const std::size_t steps = tape.value(h_steps).rows();
  if (steps == 0) throw input_error("score_sequence: empty sequence is unscorable");
  std::vector<int> user_of_row(steps, 0);
  ScorePlan plan = make_score_plan({{0, static_cast<int>(steps)}}, {0}, {ad_row});
  return batch_scores(tape, params, h_steps, user_of_row, embeddings, plan);
}

Tape::NodeId predict_prob(Tape& tape, Tape::NodeId scores) {
  return tape.clamp(tape.activate(scores, Activation::Sigmoid), kProbClip, 1.0 - kProbClip);
}

std::vector<Ranked> rank(const std::vector<double>& scores, const std::vector<std::string>& ad_ids,
                         int k) {
  if (k < 1) throw input_error("rank: k must be >= 1");
  if (scores.empty()) throw input_error("rank: no candidates");
  if (scores.size() != ad_ids.size()) throw shape_error("rank: score/id count mismatch");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ad_ids[a] < ad_ids[b];
  });
  const std::size_t take = std::min<std::size_t>(k, order.size());
  std::vector<Ranked> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({order[i], scores[order[i]]});
  return out;
}

}  // namespace adrec::scorer
