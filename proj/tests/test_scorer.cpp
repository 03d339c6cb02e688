#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "adrec/error.hpp"
#include "adrec/layers/gnn.hpp"
#include "adrec/numerics/grad_check.hpp"
#include "adrec/scorer/scorer.hpp"
#include "doctest.h"

using namespace adrec;
using namespace adrec::scorer;
using num::Matrix;
using num::ParamStore;
using num::Tape;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
  return m;
}

ParamStore scorer_params(int d, std::uint64_t seed) {
  ParamStore params;
  layers::GnnConfig cfg{.embed_dim = d, .heads = 1, .time_dim = 2};
  layers::init_model_params(params, cfg, seed);
  return params;
}

}  // namespace

TEST_CASE("step_weights: singleton sequence gets weight 1") {
  auto params = scorer_params(4, 1);
  Tape tape;
  std::mt19937_64 rng(2);
  auto h = tape.constant(random_matrix(1, 4, rng));
  auto alpha = step_weights(tape, params, h, {0});
  CHECK(tape.value(alpha)(0, 0) == 1.0);
}

TEST_CASE("step_weights: identical states give uniform 1/T") {
  auto params = scorer_params(4, 3);
  Tape tape;
  Matrix h(5, 4, 0.37);
  auto alpha = step_weights(tape, params, tape.constant(h), {0, 0, 0, 0, 0});
  for (int t = 0; t < 5; ++t) CHECK(tape.value(alpha)(t, 0) == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("step_weights: T = 2 fixture matches hand softmax") {
  ParamStore params;
  params.create("scorer.q", Matrix::from_rows(2, 1, {0.3, -0.2}));
  Tape tape;
  auto h = tape.constant(Matrix::from_rows(2, 2, {1.0, 0.0, 0.0, 1.0}));
  auto alpha = step_weights(tape, params, h, {0, 0});
  // logits = [0.3, -0.2]
  const double e0 = std::exp(0.0), e1 = std::exp(-0.5);  // max-subtracted
  CHECK(tape.value(alpha)(0, 0) == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-14));
  CHECK(tape.value(alpha)(1, 0) == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-14));
}

TEST_CASE("step_weights: sums to 1 and shift invariant") {
  auto params = scorer_params(6, 5);
  std::mt19937_64 rng(7);
  Matrix h = random_matrix(7, 6, rng);
  std::vector<int> users = {0, 0, 0, 1, 1, 2, 2};
  Tape tape;
  auto alpha = tape.value(step_weights(tape, params, tape.constant(h), users));
  std::vector<double> sums(3, 0.0);
  for (int t = 0; t < 7; ++t) {
    CHECK(alpha(t, 0) > 0.0);
    CHECK(alpha(t, 0) <= 1.0);
    sums[users[t]] += alpha(t, 0);
  }
  for (double s : sums) CHECK(std::abs(s - 1.0) <= 1e-12);

  //

  // Softmax shift invariance. Bit-identical when the shifted logits are
  // exactly representable (dyadic values); within 1e-12 otherwise.
  {
    Tape t2;
    auto logits = t2.constant(Matrix::from_rows(4, 1, {0.5, -0.25, 1.75, 0.125}));
    auto shifted = t2.constant(Matrix::from_rows(4, 1, {2.5, 1.75, 3.75, 2.125}));
    std::vector<int> seg = {0, 0, 0, 0};
    auto a1 = t2.value(t2.segment_softmax(logits, seg));
    auto a2 = t2.value(t2.segment_softmax(shifted, seg));
    for (int t = 0; t < 4; ++t) CHECK(a1(t, 0) == a2(t, 0));
  }
  {
    Tape t2;
    auto logits = t2.matmul(t2.constant(h), t2.param(params, "scorer.q"));
    auto shifted = t2.add(logits, t2.constant(Matrix(7, 1, 3.75)));
    auto a1 = t2.value(t2.segment_softmax(logits, users));
    auto a2 = t2.value(t2.segment_softmax(shifted, users));
    for (int t = 0; t < 7; ++t) CHECK(a1(t, 0) == doctest::Approx(a2(t, 0)).epsilon(1e-12));
  }
}

TEST_CASE("score_sequence: T = 1 equals the plain FFN value") {
  auto params = scorer_params(4, 9);
  std::mt19937_64 rng(11);
  Matrix h = random_matrix(1, 4, rng);
  Matrix ads = random_matrix(3, 4, rng);
  Tape tape;
  auto s = score_sequence(tape, params, tape.constant(h), tape.constant(ads), 2);

  Tape t2;
  std::vector<Tape::NodeId> parts = {t2.constant(h), t2.gather_rows(t2.constant(ads), {2})};
  auto f = ffn_scores(t2, params, t2.concat_cols(parts));
  CHECK(tape.value(s)(0, 0) == doctest::Approx(t2.value(f)(0, 0)).epsilon(1e-14));
}

TEST_CASE("score: constant scorer output makes S = c for any sequence") {
  ParamStore params;
  const int d = 4;
  const double c = -0.625;
  params.create("scorer.q", Matrix::from_rows(d, 1, {0.5, -1.0, 2.0, 0.1}));
  params.create("scorer.ffn.W1", Matrix::zeros(2 * d, d));
  params.create("scorer.ffn.b1", Matrix::zeros(1, d));
  params.create("scorer.ffn.W2", Matrix::zeros(d, 1));
  params.create("scorer.ffn.b2", Matrix(1, 1, c));
  std::mt19937_64 rng(13);
  Tape tape;
  auto s = score_sequence(tape, params, tape.constant(random_matrix(5, d, rng)),
                          tape.constant(random_matrix(2, d, rng)), 0);
  CHECK(tape.value(s)(0, 0) == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("score: T = 2 fixture vs hand-evaluated MLP and weights") {
  ParamStore params;
  const int d = 2;
  params.create("scorer.q", Matrix::from_rows(2, 1, {1.0, -1.0}));
  params.create("scorer.ffn.W1", Matrix::from_rows(4, 2, {0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8}));
  params.create("scorer.ffn.b1", Matrix::from_rows(1, 2, {0.05, -0.05}));
  params.create("scorer.ffn.W2", Matrix::from_rows(2, 1, {1.5, -2.5}));
  params.create("scorer.ffn.b2", Matrix(1, 1, 0.25));
  const Matrix h = Matrix::from_rows(2, 2, {0.6, -0.2, -0.1, 0.9});
  const Matrix ad = Matrix::from_rows(1, 2, {0.3, 0.7});

  Tape tape;
  auto s = score_sequence(tape, params, tape.constant(h), tape.constant(ad), 0);

  // Hand evaluation with plain loops.
  auto f_theta = [&](double h0, double h1) {
    const double x[4] = {h0, h1, 0.3, 0.7};
    double hid[2] = {0.05, -0.05};
    const Matrix& w1 = params.value("scorer.ffn.W1");
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 4; ++k) hid[j] += x[k] * w1(k, j);
    for (double& v : hid) v = std::max(0.0, v);
    return 0.25 + 1.5 * hid[0] - 2.5 * hid[1];
  };
  const double l0 = 1.0 * 0.6 - 1.0 * (-0.2), l1 = 1.0 * (-0.1) - 1.0 * 0.9;
  const double m = std::max(l0, l1);
  const double a0 = std::exp(l0 - m), a1 = std::exp(l1 - m);
  const double expect =
      (a0 * f_theta(0.6, -0.2) + a1 * f_theta(-0.1, 0.9)) / (a0 + a1);
  CHECK(tape.value(s)(0, 0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("predict_prob: definitional points and clipping") {
  Tape tape;
  auto s = tape.constant(Matrix::from_rows(3, 1, {0.0, 1.0, 1000.0}));
  auto p = predict_prob(tape, s);
  CHECK(tape.value(p)(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tape.value(p)(1, 0) == doctest::Approx(0.7310585786).epsilon(1e-9));
  CHECK(tape.value(p)(2, 0) == 1.0 - 1e-7);
}

TEST_CASE("rank: ties break by ascending ad id, k caps the list") {
  std::vector<double> scores = {0.5, 0.9, 0.5, 0.1};
  std::vector<std::string> ids = {"ad_b", "ad_c", "ad_a", "ad_d"};
  auto top = rank(scores, ids, 10);
  REQUIRE(top.size() == 4);
  CHECK(ids[top[0].candidate] == "ad_c");
  CHECK(ids[top[1].candidate] == "ad_a");  // tie with ad_b -> lower id first
  CHECK(ids[top[2].candidate] == "ad_b");
  CHECK(ids[top[3].candidate] == "ad_d");

  auto top2 = rank(scores, ids, 2);
  REQUIRE(top2.size() == 2);
  CHECK(ids[top2[0].candidate] == "ad_c");
}

TEST_CASE("rank: matches brute-force sort oracle and is a permutation prefix") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5;
    std::vector<double> scores;
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
      scores.push_back(static_cast<double>(rng() % 4));  // force ties
      ids.push_back("ad_" + std::to_string(i));
    }
    auto top = rank(scores, ids, 3);
    // Oracle: full sort of (score desc, id asc) pairs.
    std::vector<std::pair<double, std::string>> oracle;
    for (int i = 0; i < n; ++i) oracle.push_back({-scores[i], ids[i]});
    std::sort(oracle.begin(), oracle.end());
    std::set<int> seen;
    for (std::size_t i = 0; i < top.size(); ++i) {
      CHECK(ids[top[i].candidate] == oracle[i].second);
      CHECK(seen.insert(top[i].candidate).second);
    }
  }
}

TEST_CASE("rank: input validation") {
  CHECK_THROWS_AS(rank({}, {}, 3), Error);
  CHECK_THROWS_AS(rank({1.0}, {"a"}, 0), Error);
}

TEST_CASE("batch_scores matches per-sample score_sequence") {
  auto params = scorer_params(4, 19);
  std::mt19937_64 rng(23);
  Matrix steps = random_matrix(5, 4, rng);  // user 0 rows [0,3), user 1 rows [3,5)
  Matrix ads = random_matrix(3, 4, rng);
  std::vector<int> user_of_row = {0, 0, 0, 1, 1};
  std::vector<std::pair<int, int>> ranges = {{0, 3}, {3, 5}};
  std::vector<int> sample_user = {0, 1, 0};
  std::vector<int> sample_ad = {2, 0, 1};

  Tape tape;
  auto plan = make_score_plan(ranges, sample_user, sample_ad);
  auto s = batch_scores(tape, params, tape.constant(steps), user_of_row, tape.constant(ads), plan);
  REQUIRE(tape.value(s).rows() == 3);

  for (int i = 0; i < 3; ++i) {
    Tape t2;
    const auto [b, e] = ranges[sample_user[i]];
    Matrix h(e - b, 4);
    for (int r = b; r < e; ++r)
      for (int c = 0; c < 4; ++c) h(r - b, c) = steps(r, c);
    auto one = score_sequence(t2, params, t2.constant(h), t2.constant(ads), sample_ad[i]);
    CHECK(tape.value(s)(i, 0) == doctest::Approx(t2.value(one)(0, 0)).epsilon(1e-13));
  }
}

TEST_CASE("scorer gradients pass grad_check") {
  auto params = scorer_params(4, 29);
  std::mt19937_64 rng(31);
  Matrix steps = random_matrix(4, 4, rng);
  Matrix ads = random_matrix(2, 4, rng);
  std::vector<int> user_of_row = {0, 0, 1, 1};
  auto build = [&](Tape& t, ParamStore& ps) {
    auto plan = make_score_plan({{0, 2}, {2, 4}}, {0, 1, 1}, {0, 1, 0});
    auto s = batch_scores(t, ps, t.constant(steps), user_of_row, t.constant(ads), plan);
    auto p = predict_prob(t, s);
    Matrix y(3, 1, 0.0);
    y(0, 0) = 1.0;
    Matrix w(3, 1, 1.0);
    return t.weighted_bce(p, y, w);
  };
  CHECK(num::grad_check(build, params) <= 1e-4);
}
