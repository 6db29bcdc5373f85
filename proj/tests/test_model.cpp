#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "scalar_oracle.hpp"
#include "sgnn/model.hpp"
#include "test_util.hpp"

using namespace sgnn;
using namespace sgnn::testutil;

namespace {

SgnnParams zero_params(Composition comp, Metric metric, bool attention, int K, int d) {
  Rng rng(1);
  SgnnParams p = init_params(comp, metric, attention, K, d, rng);
  for (auto& [name, m] : param_refs(p)) m->fill(0.0);
  return p;
}

Mat random_h0(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (auto& v : m.a) v = rng.uniform(-1.0, 1.0);
  return m;
}

Mat random_adj(int n, uint64_t seed) {
  Rng rng(seed);
  Mat a(n, n);
  for (auto& v : a.a)
    if (rng.bernoulli(0.5)) v = rng.real();
  return a;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("average composition of (v,0,0,0) is v/4") {
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, false, 1, 4);
  std::vector<double> v = {1.0, -2.0, 0.5, 4.0};
  std::vector<double> zero(4, 0.0);
  auto out = compose_event(p, {v, zero, zero, zero});
  REQUIRE(out.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(out[static_cast<size_t>(i)] == doctest::Approx(v[static_cast<size_t>(i)] / 4.0));
}

TEST_CASE("nonlinear composition with zero parameters gives the zero vector") {
  SgnnParams p = zero_params(Composition::Nonlinear, Metric::Dot, false, 1, 3);
  std::vector<double> a = {1, 2, 3}, b = {0.5, 0, -1}, c = {2, 2, 2}, d = {-1, 0, 1};
  auto out = compose_event(p, {a, b, c, d});
  for (double x : out) CHECK(x == 0.0);
}

TEST_CASE("concatenation of d=128 inputs is 512-dimensional") {
  Rng rng(3);
  SgnnParams p = init_params(Composition::Concatenation, Metric::Dot, false, 1, 128, rng);
  CHECK(p.H == 512);
  std::vector<double> v(128, 0.25);
  auto out = compose_event(p, {v, v, v, v});
  CHECK(out.size() == 512);
  CHECK(out[0] == 0.25);
  CHECK(out[511] == 0.25);
}

TEST_CASE("nonlinear composition matches a scalar evaluation") {
  Rng rng(17);
  SgnnParams p = init_params(Composition::Nonlinear, Metric::Dot, false, 1, 5, rng);
  std::vector<std::vector<double>> in(4, std::vector<double>(5));
  for (auto& vec : in)
    for (auto& x : vec) x = rng.uniform(-1, 1);
  auto out = compose_event(p, {in[0], in[1], in[2], in[3]});
  const Mat* Ws[4] = {&p.comp_Wp, &p.comp_W0, &p.comp_W1, &p.comp_W2};
  for (int i = 0; i < 5; ++i) {
    double s = p.comp_b(0, i);
    for (int t = 0; t < 4; ++t)
      for (int j = 0; j < 5; ++j) s += (*Ws[t])(i, j) * in[static_cast<size_t>(t)][static_cast<size_t>(j)];
    CHECK(out[static_cast<size_t>(i)] == doctest::Approx(std::tanh(s)).epsilon(1e-12));
  }
}

TEST_CASE("similarity examples") {
  std::vector<double> v = {3, -4};
  CHECK(similarity(Metric::Cosine, v, v) == doctest::Approx(1.0));
  CHECK(similarity(Metric::Dot, {{1.0, 2.0}}, {{3.0, 4.0}}) == doctest::Approx(11.0));
  CHECK(similarity(Metric::Euclidean, v, v) == 0.0);
  std::vector<double> w = {3.0, -3.9};
  CHECK(similarity(Metric::Euclidean, v, w) < 0.0);   // any distinct pair scores below 0
  CHECK(similarity(Metric::Manhattan, v, w) == doctest::Approx(-0.1));
  std::vector<double> zero = {0, 0};
  CHECK(similarity(Metric::Cosine, zero, v) == 0.0);  // zero-vector rule
  CHECK(similarity(Metric::Cosine, v, zero) == 0.0);
}

TEST_CASE("similarity is symmetric for all metrics") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(6), b(6);
    for (auto& x : a) x = rng.uniform(-2, 2);
    for (auto& x : b) x = rng.uniform(-2, 2);
    for (Metric m : {Metric::Manhattan, Metric::Cosine, Metric::Dot, Metric::Euclidean})
      CHECK(similarity(m, a, b) == doctest::Approx(similarity(m, b, a)).epsilon(1e-14));
  }
}

TEST_CASE("ggnn_forward with K=0 returns h0 bit-exactly") {
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, false, 0, 4);
  Rng rng(2);
  for (auto& [name, m] : param_refs(p))
    for (auto& v : m->a) v = rng.uniform(-1, 1);
  Mat h0 = random_h0(5, 4, 3);
  ForwardCache cache;
  cache.n = 3;
  cache.k = 2;
  ggnn_forward(h0, random_adj(5, 4), p, cache);
  CHECK(cache.hK().a == h0.a);
}

TEST_CASE("zero adjacency and zero weights give h1 = h0/2") {
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, false, 1, 4);
  Mat h0 = random_h0(5, 4, 9);
  ForwardCache cache;
  cache.n = 3;
  cache.k = 2;
  ggnn_forward(h0, Mat(5, 5), p, cache);
  for (size_t i = 0; i < h0.a.size(); ++i)
    CHECK(cache.hK().a[i] == doctest::Approx(0.5 * h0.a[i]).epsilon(1e-15));
}

TEST_CASE("vectorized propagation matches the scalar oracle on random cases") {
  Rng rng(41);
  for (int rep = 0; rep < 100; ++rep) {
    int N = 2 + static_cast<int>(rng.index(5));  // n+k <= 6
    int H = 2 + static_cast<int>(rng.index(7));  // H <= 8
    int K = static_cast<int>(rng.index(4));
    Rng prng(1000 + static_cast<uint64_t>(rep));
    SgnnParams p = init_params(Composition::Average, Metric::Dot, false, K, H, prng);
    Mat h0 = random_h0(N, H, 2000 + static_cast<uint64_t>(rep));
    Mat A = random_adj(N, 3000 + static_cast<uint64_t>(rep));

    ForwardCache cache;
    cache.n = N - 1;
    cache.k = 1;
    ggnn_forward(h0, A, p, cache);

    oracle::Grid gh0(static_cast<size_t>(N), std::vector<double>(static_cast<size_t>(H)));
    oracle::Grid gA(static_cast<size_t>(N), std::vector<double>(static_cast<size_t>(N)));
    for (int i = 0; i < N; ++i)
      for (int x = 0; x < H; ++x) gh0[static_cast<size_t>(i)][static_cast<size_t>(x)] = h0(i, x);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) gA[static_cast<size_t>(i)][static_cast<size_t>(j)] = A(i, j);
    auto expected = oracle::scalar_ggnn(gh0, gA, p);
    for (int i = 0; i < N; ++i)
      for (int x = 0; x < H; ++x)
        CHECK(std::fabs(cache.hK()(i, x) - expected[static_cast<size_t>(i)][static_cast<size_t>(x)]) < 1e-10);
  }
}

TEST_CASE("gates stay inside (0,1) and states stay finite") {
  Rng rng(55);
  SgnnParams p = init_params(Composition::Average, Metric::Dot, false, 3, 6, rng);
  Mat h0 = random_h0(6, 6, 56);
  ForwardCache cache;
  cache.n = 4;
  cache.k = 2;
  ggnn_forward(h0, random_adj(6, 57), p, cache);
  for (const auto& gate : {cache.z, cache.r})
    for (const Mat& m : gate)
      for (double v : m.a) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
  for (const Mat& m : cache.h) CHECK(m.finite());
}

TEST_CASE("shape mismatches fail before any computation") {
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, false, 1, 4);
  ForwardCache cache;
  cache.n = 2;
  cache.k = 1;
  CHECK_THROWS_AS(ggnn_forward(random_h0(3, 5, 1), Mat(3, 3), p, cache), ConfigError);  // H wrong
  CHECK_THROWS_AS(ggnn_forward(random_h0(3, 4, 1), Mat(4, 4), p, cache), ConfigError);  // A wrong
}

TEST_CASE("uniform attention weights reduce to 1/n") {
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, true, 1, 3);
  Mat h_ctx = random_h0(4, 3, 11);
  Mat h_cand = random_h0(2, 3, 12);
  // zero projections give u = tanh(0) = 0 for every pair
  Mat u;
  Mat alpha = attention_weights(h_ctx, h_cand, p, &u);
  for (double x : u.a) CHECK(x == 0.0);
  for (double x : alpha.a) CHECK(x == doctest::Approx(0.25));
}

TEST_CASE("attention matches the scalar softmax oracle") {
  // wh = (1,0), contexts (1,*) and (0,*): u = (tanh(1), tanh(0))
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, true, 1, 2);
  p.att_wh(0, 0) = 1.0;
  Mat h_ctx(2, 2);
  h_ctx(0, 0) = 1.0;
  h_ctx(0, 1) = 0.7;
  h_ctx(1, 0) = 0.0;
  h_ctx(1, 1) = -0.3;
  Mat h_cand = random_h0(1, 2, 13);
  Mat alpha = attention_weights(h_ctx, h_cand, p, nullptr);
  auto expected = oracle::scalar_softmax({std::tanh(1.0), std::tanh(0.0)});
  CHECK(std::fabs(alpha(0, 0) - expected[0]) < 1e-12);
  CHECK(std::fabs(alpha(1, 0) - expected[1]) < 1e-12);
}

TEST_CASE("attention rows always sum to one") {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    SgnnParams p = init_params(Composition::Average, Metric::Dot, true, 1, 5, rng);
    Mat alpha = attention_weights(random_h0(6, 5, 100 + static_cast<uint64_t>(rep)),
                                  random_h0(3, 5, 200 + static_cast<uint64_t>(rep)), p, nullptr);
    for (int j = 0; j < alpha.cols; ++j) {
      double sum = 0;
      for (int i = 0; i < alpha.rows; ++i) {
        sum += alpha(i, j);
        CHECK(alpha(i, j) > 0.0);
        CHECK(alpha(i, j) < 1.0);
      }
      CHECK(std::fabs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("single context event scores equal the pair similarity") {
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, false, 0, 3);
  ForwardCache cache;
  cache.n = 1;
  cache.k = 2;
  Mat h0(3, 3);
  h0(0, 0) = 1;
  h0(0, 1) = 2;
  h0(0, 2) = -1;
  h0(1, 0) = 0.5;
  h0(2, 2) = 4;
  ggnn_forward(h0, Mat(3, 3), p, cache);
  score_candidates(p, cache);
  CHECK(cache.scores[0] == doctest::Approx(similarity(Metric::Dot, h0.row(0), h0.row(1))));
  CHECK(cache.scores[1] == doctest::Approx(similarity(Metric::Dot, h0.row(0), h0.row(2))));
}

TEST_CASE("hand-computed dot score table for n=2 k=2") {
  // ctx1=(1,2), ctx2=(0,1); cand1=(2,1), cand2=(1,0)
  // g = [[4, 1], [1, 0]]; s = (2.5, 0.5)
  SgnnParams p = zero_params(Composition::Average, Metric::Dot, false, 0, 2);
  ForwardCache cache;
  cache.n = 2;
  cache.k = 2;
  Mat h0(4, 2);
  h0(0, 0) = 1;
  h0(0, 1) = 2;
  h0(1, 0) = 0;
  h0(1, 1) = 1;
  h0(2, 0) = 2;
  h0(2, 1) = 1;
  h0(3, 0) = 1;
  h0(3, 1) = 0;
  ggnn_forward(h0, Mat(4, 4), p, cache);
  score_candidates(p, cache);
  CHECK(cache.gvals(0, 0) == doctest::Approx(4.0));
  CHECK(cache.gvals(1, 0) == doctest::Approx(1.0));
  CHECK(cache.gvals(0, 1) == doctest::Approx(1.0));
  CHECK(cache.gvals(1, 1) == doctest::Approx(0.0));
  CHECK(cache.scores[0] == doctest::Approx(2.5));
  CHECK(cache.scores[1] == doctest::Approx(0.5));
}

TEST_CASE("uniform attention scoring equals the no-attention mean") {
  auto inst = random_instance(5, 3, 31);
  SgnnModel with_att = random_model(Composition::Nonlinear, Metric::Euclidean, true, 2, 6, {inst}, 32);
  with_att.params.att_wh.fill(0.0);
  with_att.params.att_wc.fill(0.0);
  with_att.params.att_bu.fill(0.0);
  SgnnModel no_att = with_att;
  no_att.params.use_attention = false;
  Neeg g = random_graph(33);
  auto s1 = forward_instance(with_att, inst, g).scores;
  auto s2 = forward_instance(no_att, inst, g).scores;
  REQUIRE(s1.size() == s2.size());
  for (size_t j = 0; j < s1.size(); ++j) CHECK(std::fabs(s1[j] - s2[j]) < 1e-9);
}

TEST_CASE("forced-equal scores pick index 0") {
  auto inst = random_instance(4, 5, 61);
  SgnnModel m = random_model(Composition::Average, Metric::Dot, false, 0, 4, {inst}, 62);
  m.pred.vectors.fill(0.0);  // every event composes to the zero vector
  m.arg.vectors.fill(0.0);
  Neeg g = random_graph(63);
  CHECK(predict(m, inst, g) == 0);
}

TEST_CASE("K=0 dot predictions reduce to mean pairwise dot of composed inputs") {
  auto inst = random_instance(6, 4, 71);
  SgnnModel m = random_model(Composition::Average, Metric::Dot, false, 0, 5, {inst}, 72);
  Neeg g = random_graph(73);
  auto cache = forward_instance(m, inst, g);
  // closed form: compose inputs, average the dots
  std::vector<double> closed(4, 0.0);
  for (int j = 0; j < 4; ++j) {
    double s = 0;
    for (int i = 0; i < 6; ++i) {
      auto vc = compose_event(m.params, event_input_vectors(m.pred, m.arg, inst.context[static_cast<size_t>(i)]).v);
      auto vj = compose_event(m.params, event_input_vectors(m.pred, m.arg, inst.candidates[static_cast<size_t>(j)]).v);
      s += dot(vc, vj);
    }
    closed[static_cast<size_t>(j)] = s / 6.0;
  }
  for (int j = 0; j < 4; ++j)
    CHECK(cache.scores[static_cast<size_t>(j)] == doctest::Approx(closed[static_cast<size_t>(j)]).epsilon(1e-12));
  CHECK(predict(m, inst, g) == argmax_score(closed));
}

TEST_CASE("prediction is stable under candidate permutation") {
  auto inst = random_instance(5, 5, 81);
  SgnnModel m = random_model(Composition::Concatenation, Metric::Euclidean, true, 2, 4, {inst}, 82);
  Neeg g = random_graph(83);
  int base = predict(m, inst, g);
  Event predicted = inst.candidates[static_cast<size_t>(base)];
  Instance rotated = inst;
  std::rotate(rotated.candidates.begin(), rotated.candidates.begin() + 2, rotated.candidates.end());
  rotated.gold = 0;  // gold irrelevant for predict
  int moved = predict(m, rotated, g);
  CHECK(rotated.candidates[static_cast<size_t>(moved)] == predicted);
}

TEST_CASE("graph-supported candidate beats the unsupported one under identity-like propagation") {
  // Context events B and C both feed candidate D; candidate E is isolated.
  // D and E share identical input vectors, so only propagation separates them.
  std::vector<Chain> chains;
  for (int i = 0; i < 4; ++i) chains.push_back(chain_of({"B", "C", "D"}));
  chains.push_back(chain_of({"B", "D"}));
  chains.push_back(chain_of({"E0"}));
  Neeg g = build_neeg(chains);

  const int d = 2;
  SgnnModel m;
  m.params = zero_params(Composition::Average, Metric::Dot, false, 1, d);
  m.params.W(0, 0) = 1.0;  // c = tanh(a): pass aggregated neighbours through
  m.params.W(1, 1) = 1.0;
  m.pred = table_of({{"B/subj", {4, 0}}, {"C/subj", {4, 0}}, {"D/subj", {0, 4}}, {"E/subj", {0, 4}}}, d);
  m.arg = table_of({}, d);

  Instance inst;
  inst.context = {ev("B"), ev("C")};
  inst.candidates = {ev("E"), ev("D")};  // gold D placed second
  inst.gold = 1;
  auto cache = forward_instance(m, inst, g);
  CHECK(cache.scores[1] > cache.scores[0]);
  CHECK(predict(m, inst, g) == 1);
}

TEST_CASE("checkpoints round-trip through save and load") {
  auto inst = random_instance(4, 3, 91);
  SgnnModel m = random_model(Composition::Nonlinear, Metric::Cosine, true, 2, 5, {inst}, 92);
  m.meta.epoch = 7;
  m.meta.dev_accuracy = 0.625;
  m.meta.init_seed = 92;
  auto path = (std::filesystem::temp_directory_path() / "sgnn_test_ckpt.bin").string();
  save_model(m, path);
  SgnnModel back = load_model(path);
  CHECK(back.params.composition == m.params.composition);
  CHECK(back.params.metric == m.params.metric);
  CHECK(back.params.use_attention == m.params.use_attention);
  CHECK(back.params.K == m.params.K);
  CHECK(back.params.d == m.params.d);
  CHECK(back.params.H == m.params.H);
  CHECK(back.meta.epoch == 7);
  CHECK(back.meta.dev_accuracy == 0.625);
  auto a = param_refs(m.params);
  auto b = param_refs(back.params);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].second->a == b[i].second->a);
  Neeg g = random_graph(93);
  CHECK(predict(m, inst, g) == predict(back, inst, g));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
