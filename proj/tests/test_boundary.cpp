#include <cmath>
#include <limits>

#include "doctest.h"
#include "og/boundary.hpp"
#include "og/gradcheck.hpp"
#include "support.hpp"

using namespace og;
using og::test::random_tensor;
using og::test::sigmoid;

namespace {

ModelConfig boundary_config(std::size_t hidden, BoundaryVariant v) {
  ModelConfig c;
  c.doc_vocab = 8;
  c.head_vocab = 8;
  c.hidden = hidden;
  c.attn = hidden;
  c.boundary = v;
  c.init_range = Real(0.5);
  return c;
}

double brute_score(const Tensor& e, const Tensor& tr, const std::vector<int>& y) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += e.at(i, static_cast<std::size_t>(y[i]));
    if (i) s += tr.at(static_cast<std::size_t>(y[i - 1]), static_cast<std::size_t>(y[i]));
  }
  return s;
}

std::vector<int> bits(std::size_t mask, std::size_t m) {
  std::vector<int> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = static_cast<int>((mask >> i) & 1);
  return y;
}

}  // namespace

TEST_SUITE("boundary") {

TEST_CASE("threshold_labels") {
  CHECK(threshold_labels(std::vector<Real>{0.6, 0.4, 0.2}, 0.5) == std::vector<int>{1, 0, 1});
  CHECK(threshold_labels(std::vector<Real>{0.1, 0.2, 0.3}, 0.5) == std::vector<int>{0, 0, 1});
  CHECK(threshold_labels(std::vector<Real>{0.9, 0.8, 0.7}, 0.5) == std::vector<int>{1, 1, 1});
  CHECK(threshold_labels(std::vector<Real>{0.5, 0.5}, 0.5) == std::vector<int>{0, 1});
}

TEST_CASE("mpd: zero parameters give one half") {
  Rng rng(1);
  ParamSet ps;
  BoundaryModel b(ps, boundary_config(2, BoundaryVariant::kMpd), rng);
  ps[b.w1].value.fill(0);
  ps[b.w2].value.fill(0);
  Tape t(&ps);
  std::vector<Var> h;
  for (int i = 0; i < 3; ++i) h.push_back(t.constant(random_tensor({4}, rng)));
  auto seq = b.predict(t, h, 0.5);
  for (Real p : seq.probabilities) CHECK(p == 0.5);
  CHECK(seq.labels == std::vector<int>{0, 0, 1});
}

TEST_CASE("mpd: hand-set 2-dim bilinear forms") {
  Rng rng(2);
  ParamSet ps;
  BoundaryModel b(ps, boundary_config(1, BoundaryVariant::kMpd), rng);
  ps[b.w1].value = Tensor::matrix(2, 2, {0.5, -1.0, 2.0, 0.25});
  ps[b.w2].value = Tensor::matrix(2, 2, {-0.3, 0.7, 1.5, 0.0});
  Tape t(&ps);
  Var e1 = t.constant(Tensor::vector({1, 0})), e2 = t.constant(Tensor::vector({0, 1}));
  // h_prev = e1, h_cur = e2, h_next = e1: W1[0][1] + W2[1][0]
  CHECK(t.scalar(b.mpd_logit(t, e1, e2, e1)) == doctest::Approx(-1.0 + 1.5).epsilon(1e-15));
  // h_prev = e2, h_cur = e1, h_next = e2: W1[1][0] + W2[0][1]
  const double logit = 2.0 + 0.7;
  CHECK(t.scalar(b.mpd_logit(t, e2, e1, e2)) == doctest::Approx(logit).epsilon(1e-15));
  // edges: missing neighbours contribute nothing
  CHECK(t.scalar(b.mpd_logit(t, std::nullopt, e1, e2)) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(t.scalar(b.mpd_logit(t, e2, e1, std::nullopt)) == doctest::Approx(2.0).epsilon(1e-15));

  std::vector<Var> states{e2, e1, e2};
  auto seq = b.predict(t, states, 0.5);
  CHECK(seq.probabilities[1] == doctest::Approx(sigmoid(logit)).epsilon(1e-14));
}

TEST_CASE("property: p(1) + p(0) == 1") {
  Rng rng(3);
  ParamSet ps;
  BoundaryModel b(ps, boundary_config(3, BoundaryVariant::kMpd), rng);
  for (int trial = 0; trial < 500; ++trial) {
    Tape t(&ps);
    std::vector<Var> h;
    for (int i = 0; i < 4; ++i) h.push_back(t.constant(random_tensor({6}, rng, -3, 3)));
    for (Real p : b.predict(t, h, 0.5).probabilities) {
      const Real q = 1 - p;
      CHECK(p + q == 1);
      CHECK(p > 0);
      CHECK(p < 1);
    }
  }
}

TEST_CASE("property: Markov locality of the MPD logit") {
  Rng rng(4);
  ParamSet ps;
  BoundaryModel b(ps, boundary_config(3, BoundaryVariant::kMpd), rng);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m_count = 4 + rng.below(5);
    Tape t(&ps);
    std::vector<Var> h;
    for (std::size_t i = 0; i < m_count; ++i) h.push_back(t.constant(random_tensor({6}, rng)));
    const std::size_t m = rng.below(m_count);
    std::size_t j;
    do j = rng.below(m_count);
    while (j + 1 >= m && j <= m + 1);
    const Real before = t.scalar(b.logits(t, h)[m]);
    h[j] = t.constant(random_tensor({6}, rng, -5, 5));
    CHECK(t.scalar(b.logits(t, h)[m]) == before);
  }
}

TEST_CASE("-P variant uses only the current paragraph") {
  Rng rng(5);
  ParamSet ps;
  BoundaryModel b(ps, boundary_config(1, BoundaryVariant::kMpdMinusP), rng);
  ps[b.local_w].value = Tensor::vector({0.5, -2});
  ps[b.local_b].value = Tensor::scalar(0.25);
  Tape t(&ps);
  std::vector<Var> h{t.constant(Tensor::vector({1, 1})), t.constant(Tensor::vector({2, -1})),
                     t.constant(Tensor::vector({0, 0}))};
  auto seq = b.predict(t, h, 0.5);
  CHECK(seq.probabilities[0] == doctest::Approx(sigmoid(0.5 - 2 + 0.25)).epsilon(1e-14));
  CHECK(seq.probabilities[1] == doctest::Approx(sigmoid(1 + 2 + 0.25)).epsilon(1e-14));
  CHECK(seq.labels == std::vector<int>{0, 1, 1});
}

TEST_CASE("gpd: singleton attention, normalization and scalar trace") {
  Rng rng(6);
  ParamSet ps;
  ModelConfig c = boundary_config(1, BoundaryVariant::kGpd);
  c.attn = 1;
  BoundaryModel b(ps, c, rng);

  SUBCASE("M = 2 attends fully to the other paragraph") {
    Tape t(&ps);
    std::vector<Var> h{t.constant(Tensor::vector({0.3, -0.7})), t.constant(Tensor::vector({1.2, 0.4}))};
    std::vector<Real> att;
    Var l = b.gpd_logit(t, h, 0, &att);
    REQUIRE(att.size() == 1);
    CHECK(att[0] == 1);
    const Tensor& wg = ps[b.gpd_bilinear].value;
    double want = 0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) want += t.value(h[0])[i] * wg.at(i, j) * t.value(h[1])[j];
    CHECK(t.scalar(l) == doctest::Approx(want).epsilon(1e-14));
  }

  SUBCASE("hand-set 1-dim attention, M = 3") {
    ps[b.gpd_v].value = Tensor::vector({1.5});
    ps[b.gpd_w1].value = Tensor::matrix(1, 2, {0.4, -0.2});
    ps[b.gpd_w2].value = Tensor::matrix(1, 2, {0.3, 0.1});
    ps[b.gpd_b].value = Tensor::vector({-0.1});
    ps[b.gpd_bilinear].value = Tensor::matrix(2, 2, {1, 0.5, -0.5, 2});
    const double h[3][2] = {{1, 0}, {0.5, -1}, {-0.2, 0.8}};
    Tape t(&ps);
    std::vector<Var> hs;
    for (auto& r : h) hs.push_back(t.constant(Tensor::vector({r[0], r[1]})));
    const std::size_t m = 1;
    const double q = 0.3 * h[m][0] + 0.1 * h[m][1] - 0.1;
    const double s0 = 1.5 * std::tanh(0.4 * h[0][0] - 0.2 * h[0][1] + q);
    const double s2 = 1.5 * std::tanh(0.4 * h[2][0] - 0.2 * h[2][1] + q);
    const double a0 = std::exp(s0) / (std::exp(s0) + std::exp(s2)), a2 = 1 - a0;
    const double g0 = a0 * h[0][0] + a2 * h[2][0], g1 = a0 * h[0][1] + a2 * h[2][1];
    const double want = h[m][0] * (1 * g0 + 0.5 * g1) + h[m][1] * (-0.5 * g0 + 2 * g1);
    std::vector<Real> att;
    CHECK(t.scalar(b.gpd_logit(t, hs, m, &att)) == doctest::Approx(want).epsilon(1e-13));
    REQUIRE(att.size() == 2);
    CHECK(att[0] + att[1] == doctest::Approx(1).epsilon(1e-15));
    CHECK(att[0] == doctest::Approx(a0).epsilon(1e-14));
  }

  SUBCASE("M = 1 falls back to the self bilinear form") {
    ps[b.gpd_bilinear].value = Tensor::matrix(2, 2, {1, 2, 3, 4});
    Tape t(&ps);
    std::vector<Var> hs{t.constant(Tensor::vector({1, -1}))};
    CHECK(t.scalar(b.gpd_logit(t, hs, 0)) == doctest::Approx(1 - 2 - 3 + 4).epsilon(1e-15));
  }
}

TEST_CASE("crf: single position and uniform cases") {
  Tensor tr({2, 2});
  Tensor e = Tensor::matrix(1, 2, {0.3, -1.1});
  const double lse = std::log(std::exp(0.3) + std::exp(-1.1));
  CHECK(crf_loglik(e, tr, std::vector<int>{1}) == doctest::Approx(-1.1 - lse).epsilon(1e-14));
  CHECK(crf_loglik(e, tr, std::vector<int>{0}) == doctest::Approx(0.3 - lse).epsilon(1e-14));

  Tensor uniform({5, 2}, 0.7);
  for (std::size_t mask = 0; mask < 32; ++mask)
    CHECK(std::exp(crf_loglik(uniform, tr, bits(mask, 5))) == doctest::Approx(1.0 / 32).epsilon(1e-12));
}

TEST_CASE("property: CRF forward algorithm and Viterbi match brute-force enumeration") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(8);
    Tensor e = random_tensor({m, 2}, rng, -2, 2), tr = random_tensor({2, 2}, rng, -2, 2);
    double z = 0, best = -std::numeric_limits<double>::infinity();
    std::vector<int> argmax;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      auto y = bits(mask, m);
      const double s = brute_score(e, tr, y);
      z += std::exp(s);
      if (s > best) best = s, argmax = y;
    }
    CHECK(std::abs(crf_log_partition(e, tr) - std::log(z)) < 1e-8);
    CHECK(crf_viterbi(e, tr) == argmax);
    auto marg = crf_marginals(e, tr);
    for (std::size_t i = 0; i < m; ++i) {
      double p1 = 0;
      for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask)
        if ((mask >> i) & 1) p1 += std::exp(brute_score(e, tr, bits(mask, m))) / z;
      CHECK(marg[i] == doctest::Approx(p1).epsilon(1e-10));
    }
  }
}

TEST_CASE("crf viterbi: decoupled chain, shift invariance, ties") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(8);
    Tensor e = random_tensor({m, 2}, rng, -2, 2), tr({2, 2});
    std::vector<int> per_position(m);
    for (std::size_t i = 0; i < m; ++i) per_position[i] = e.at(i, 1) > e.at(i, 0) ? 1 : 0;
    CHECK(crf_viterbi(e, tr) == per_position);

    Tensor tr2 = random_tensor({2, 2}, rng, -2, 2);
    auto before = crf_viterbi(e, tr2);
    const std::size_t i = rng.below(m);
    const Real c = static_cast<Real>(rng.uniform(-3, 3));
    e.at(i, 0) += c;
    e.at(i, 1) += c;
    CHECK(crf_viterbi(e, tr2) == before);
  }
  CHECK(crf_viterbi(Tensor({3, 2}), Tensor({2, 2})) == std::vector<int>{0, 0, 0});
}

TEST_CASE("crf nll gradient and model loss") {
  Rng rng(9);
  ParamSet ps;
  const std::size_t e = ps.add("e", {4, 2}, rng, 1);
  const std::size_t tr = ps.add("t", {2, 2}, rng, 1);
  const std::vector<int> gold{0, 1, 0, 1};
  {
    Tape t(&ps);
    CHECK(t.scalar(crf_nll(t, t.param(e), t.param(tr), gold)) ==
          doctest::Approx(-crf_loglik(ps[e].value, ps[tr].value, gold)).epsilon(1e-14));
  }
  auto report = grad_check([&](Tape& t) { return crf_nll(t, t.param(e), t.param(tr), gold); }, ps);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("property: every variant predicts l_M = 1 and matching lengths") {
  Rng rng(10);
  for (auto v : {BoundaryVariant::kMpd, BoundaryVariant::kMpdMinusP, BoundaryVariant::kGpd, BoundaryVariant::kCrf}) {
    ParamSet ps;
    BoundaryModel b(ps, boundary_config(2, v), rng);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t m = 1 + rng.below(7);
      Tape t(&ps);
      std::vector<Var> h;
      for (std::size_t i = 0; i < m; ++i) h.push_back(t.constant(random_tensor({4}, rng, -3, 3)));
      auto seq = b.predict(t, h, 0.5);
      CHECK(seq.labels.size() == m);
      CHECK(seq.probabilities.size() == m);
      CHECK(seq.labels.back() == 1);
    }
  }
}

TEST_CASE("boundary losses pass gradient checks for every variant") {
  Rng rng(11);
  for (auto v : {BoundaryVariant::kMpd, BoundaryVariant::kMpdMinusP, BoundaryVariant::kGpd, BoundaryVariant::kCrf}) {
    CAPTURE(to_string(v));
    ParamSet ps;
    BoundaryModel b(ps, boundary_config(2, v), rng);
    std::vector<Tensor> states;
    for (int i = 0; i < 4; ++i) states.push_back(random_tensor({4}, rng));
    const std::vector<int> gold{0, 1, 0, 1};
    auto report = grad_check(
        [&](Tape& t) {
          std::vector<Var> h;
          for (const auto& s : states) h.push_back(t.constant(s));
          return b.loss(t, h, gold);
        },
        ps);
    CHECK(report.max_rel_error < 1e-6);
  }
}

}  // TEST_SUITE
