#pragma once

#include <string>
#include <vector>

#include "adrec/numerics/param_store.hpp"
#include "adrec/numerics/tape.hpp"

namespace adrec::scorer {

inline constexpr double kProbClip = 1e-7;

/// Softmax over each user's step states of q^T h_t. `h_steps` holds all
/// users' states stacked ((sum T) x d); `user_of_row` groups rows by user.
/// Returns per-row weights alpha_t, each user's summing to 1.
num::Tape::NodeId step_weights(num::Tape& tape, const num::ParamStore& params,
                               num::Tape::NodeId h_steps, const std::vector<int>& user_of_row);

/// Two-layer scorer f_theta on concatenated (state, ad) rows: 2d -> d relu
/// -> 1.
num::Tape::NodeId ffn_scores(num::Tape& tape, const num::ParamStore& params, num::Tape::NodeId x);

/// One score per sample: S_ij = sum_t alpha_t * f_theta(h_t || e_j). Each
/// sample points at a contiguous row range of one user's states in h_steps
/// and at one row of `embeddings`.
struct ScorePlan {
  std::vector<int> step_rows;   // per (sample, step) expansion row: row into h_steps
  std::vector<int> ad_rows;     // same length: row into embeddings
  std::vector<int> sample_ids;  // same length: owning sample
  std::size_t n_samples = 0;
};

/// Builds the expansion for samples given per-user row ranges.
ScorePlan make_score_plan(const std::vector<std::pair<int, int>>& user_row_range,
                          const std::vector<int>& sample_user,
                          const std::vector<int>& sample_ad_row);

num::Tape::NodeId batch_scores(num::Tape& tape, const num::ParamStore& params,
                               num::Tape::NodeId h_steps, const std::vector<int>& user_of_row,
                               num::Tape::NodeId embeddings, const ScorePlan& plan);

/// Score of one sequence (T x d states) against one ad embedding row.
num::Tape::NodeId score_sequence(num::Tape& tape, const num::ParamStore& params,
                                 num::Tape::NodeId h_steps, num::Tape::NodeId embeddings,
                                 int ad_row);

/// sigmoid(S) clipped to [kProbClip, 1 - kProbClip] for loss use.
num::Tape::NodeId predict_prob(num::Tape& tape, num::Tape::NodeId scores);

struct Ranked {
  int candidate = 0;  // index into the candidate list
  double score = 0.0;
};

/// Top-k by descending score; ties broken by ascending ad id. Returns
/// min(k, |candidates|) entries.
std::vector<Ranked> rank(const std::vector<double>& scores,
                         const std::vector<std::string>& ad_ids, int k);

}  // namespace adrec::scorer
