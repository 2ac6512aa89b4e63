#include <cmath>
#include <numeric>

#include "doctest.h"
#include "og/decoder.hpp"
#include "og/gradcheck.hpp"
#include "support.hpp"

using namespace og;
using og::test::random_tensor;
using og::test::sigmoid;

namespace {

ModelConfig decoder_config(std::size_t hidden, std::size_t dec_hidden, std::size_t vocab = 7) {
  ModelConfig c;
  c.doc_vocab = 8;
  c.head_vocab = vocab;
  c.head_emb = 2;
  c.hidden = hidden;
  c.dec_hidden = dec_hidden;
  c.attn = 2;
  c.init_range = Real(0.5);
  return c;
}

std::vector<Var> constants(Tape& t, const std::vector<Tensor>& xs) {
  std::vector<Var> out;
  for (const auto& x : xs) out.push_back(t.constant(x));
  return out;
}

std::vector<Tensor> random_states(Rng& rng, std::size_t m, std::size_t dim) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(random_tensor({dim}, rng));
  return out;
}

std::size_t steps_taken(const std::vector<int>& heading, bool degenerate, std::size_t max_len) {
  if (degenerate) return 1;
  return heading.size() == max_len ? max_len : heading.size() + 1;
}

}  // namespace

TEST_SUITE("decoder") {

TEST_CASE("sections_from_labels") {
  auto s = sections_from_labels(std::vector<int>{0, 1, 1, 0, 0, 1});
  REQUIRE(s.size() == 3);
  CHECK(s[0] == SectionSpan{0, 2});
  CHECK(s[1] == SectionSpan{2, 3});
  CHECK(s[2] == SectionSpan{3, 6});
  CHECK_THROWS_AS(sections_from_labels(std::vector<int>{1, 0}), std::invalid_argument);
}

TEST_CASE("section attention: singleton, symmetric and hand cases") {
  Rng rng(1);
  ParamSet ps;
  Decoder dec(ps, decoder_config(1, 2), rng);
  REQUIRE_FALSE(dec.w_att.has_value());
  Tape t(&ps);
  std::vector<Real> alpha;

  auto one = constants(t, {Tensor::vector({0.3, -0.4})});
  Var c = dec.section_attention(t, one, t.constant(Tensor::vector({1, 2})), &alpha);
  CHECK(alpha == std::vector<Real>{1});
  CHECK(t.value(c) == Tensor::vector({0.3, -0.4}));

  auto same = constants(t, {Tensor::vector({0.5, 1}), Tensor::vector({0.5, 1}), Tensor::vector({0.5, 1})});
  dec.section_attention(t, same, t.constant(Tensor::vector({-1, 3})), &alpha);
  for (Real a : alpha) CHECK(a == doctest::Approx(1.0 / 3).epsilon(1e-15));

  // 1-dim states [1], [2] embedded in the first coordinate.
  auto two = constants(t, {Tensor::vector({1, 0}), Tensor::vector({2, 0})});
  Var c2 = dec.section_attention(t, two, t.constant(Tensor::vector({1, 0})), &alpha);
  const double a1 = std::exp(1.0) / (std::exp(1.0) + std::exp(2.0));
  CHECK(alpha[0] == doctest::Approx(a1).epsilon(1e-14));
  CHECK(alpha[0] == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(t.value(c2)[0] == doctest::Approx(a1 + 2 * (1 - a1)).epsilon(1e-14));
  CHECK(t.value(c2)[0] == doctest::Approx(1.7311).epsilon(1e-4));
}

TEST_CASE("init state: identity projection, zero mixing and hand case") {
  Rng rng(2);
  ParamSet ps;
  Decoder dec(ps, decoder_config(1, 2), rng);
  Tape t(&ps);
  Var hm = t.constant(Tensor::vector({0.7, -1.2}));
  ps[dec.w4].value = Tensor::matrix(2, 2, {1, 0, 0, 1});
  ps[dec.b1].value.fill(0);
  CHECK(t.value(dec.init_state(t, std::nullopt, hm)) == t.value(hm));

  ps[dec.w3].value.fill(0);
  Tape t2(&ps);
  Var hm2 = t2.constant(Tensor::vector({0.7, -1.2}));
  CHECK(t2.value(dec.init_state(t2, t2.constant(Tensor::vector({3, 4})), hm2)) ==
        t2.value(dec.init_state(t2, std::nullopt, hm2)));

  ParamSet ps1;
  Decoder d1(ps1, decoder_config(1, 1), rng);
  ps1[d1.w3].value = Tensor::matrix(1, 1, {0.6});
  ps1[d1.w4].value = Tensor::matrix(1, 2, {-0.4, 0});
  ps1[d1.b1].value = Tensor::vector({0.1});
  Tape t3(&ps1);
  Var h = d1.init_state(t3, t3.constant(Tensor::vector({0.5})), t3.constant(Tensor::vector({2, 0})));
  CHECK(t3.scalar(h) == doctest::Approx(0.6 * 0.5 - 0.4 * 2 + 0.1).epsilon(1e-15));
}

TEST_CASE("review context: empty, singleton and hand case") {
  Rng rng(3);
  ParamSet ps;
  Decoder dec(ps, decoder_config(1, 1), rng);
  Tape t(&ps);
  ReviewSet r;
  std::vector<Real> beta;
  CHECK(t.value(dec.review_context(t, r, t.constant(Tensor::vector({0.5})), &beta)) == Tensor::vector({0}));
  CHECK(beta.empty());

  dec.append_review(t, r, t.constant(Tensor::vector({-0.8})));
  CHECK(t.value(dec.review_context(t, r, t.constant(Tensor::vector({0.5})), &beta)) == Tensor::vector({-0.8}));
  CHECK(beta == std::vector<Real>{1});

  ParamSet ps1;
  ModelConfig c = decoder_config(1, 1);
  c.attn = 1;
  Decoder d1(ps1, c, rng);
  ps1[d1.w5].value = Tensor::matrix(1, 1, {0.9});
  ps1[d1.w6].value = Tensor::matrix(1, 1, {-0.5});
  ps1[d1.b2].value = Tensor::vector({0.2});
  ps1[d1.v].value = Tensor::vector({1.3});
  Tape t1(&ps1);
  ReviewSet r1;
  d1.append_review(t1, r1, t1.constant(Tensor::vector({0.4})));
  d1.append_review(t1, r1, t1.constant(Tensor::vector({-1.1})));
  const double hp = 0.7;
  const double e0 = 1.3 * std::tanh(0.9 * 0.4 - 0.5 * hp + 0.2);
  const double e1 = 1.3 * std::tanh(0.9 * -1.1 - 0.5 * hp + 0.2);
  const double b0 = std::exp(e0) / (std::exp(e0) + std::exp(e1));
  Var cd = d1.review_context(t1, r1, t1.constant(Tensor::vector({hp})), &beta);
  CHECK(beta[0] == doctest::Approx(b0).epsilon(1e-14));
  CHECK(beta[1] == doctest::Approx(1 - b0).epsilon(1e-14));
  CHECK(t1.scalar(cd) == doctest::Approx(b0 * 0.4 + (1 - b0) * -1.1).epsilon(1e-14));
}

TEST_CASE("decode step: 1-dim scalar trace") {
  Rng rng(4);
  ParamSet ps;
  ModelConfig c = decoder_config(1, 1, 5);
  c.head_emb = 1;
  Decoder dec(ps, c, rng);
  // GRU input is [emb || c (2) || c_review (1)].
  const GruCell& g = dec.cell;
  ps[dec.embedding].value = Tensor::matrix(5, 1, {0.1, 0.2, 0.3, 0.4, -0.5});
  ps[g.wz].value = Tensor::matrix(1, 4, {0.3, -0.2, 0.5, 0.1});
  ps[g.uz].value = Tensor::matrix(1, 1, {0.7});
  ps[g.bz].value = Tensor::vector({-0.1});
  ps[g.wr].value = Tensor::matrix(1, 4, {-0.4, 0.6, 0.2, -0.3});
  ps[g.ur].value = Tensor::matrix(1, 1, {0.2});
  ps[g.br].value = Tensor::vector({0.05});
  ps[g.wh].value = Tensor::matrix(1, 4, {0.9, 0.1, -0.7, 0.4});
  ps[g.uh].value = Tensor::matrix(1, 1, {-0.6});
  ps[g.bh].value = Tensor::vector({0.2});
  Tensor wo({4, 5});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t w = 0; w < 5; ++w) wo.at(i, w) = static_cast<Real>(0.1 * (i + 1) - 0.07 * w);
  ps[dec.w_out].value = wo;
  ps[dec.b_out].value = Tensor::vector({0, 0.1, -0.1, 0.2, 0.3});

  const double e = -0.5, c0 = 0.8, c1 = -0.3, cd = 0.6, hp = 0.25;
  const double z = sigmoid(0.3 * e - 0.2 * c0 + 0.5 * c1 + 0.1 * cd + 0.7 * hp - 0.1);
  const double r = sigmoid(-0.4 * e + 0.6 * c0 + 0.2 * c1 - 0.3 * cd + 0.2 * hp + 0.05);
  const double cand = std::tanh(0.9 * e + 0.1 * c0 - 0.7 * c1 + 0.4 * cd - 0.6 * r * hp + 0.2);
  const double h = (1 - z) * hp + z * cand;
  const double feat[4] = {h, c0, c1, cd};
  const double bias[5] = {0, 0.1, -0.1, 0.2, 0.3};
  double logits[5], norm = 0;
  for (std::size_t w = 0; w < 5; ++w) {
    logits[w] = bias[w];
    for (std::size_t i = 0; i < 4; ++i) logits[w] += feat[i] * (0.1 * (i + 1) - 0.07 * w);
    norm += std::exp(logits[w]);
  }

  Tape t(&ps);
  auto step = dec.decode_step(t, 4, t.constant(Tensor::vector({hp})), t.constant(Tensor::vector({c0, c1})),
                              t.constant(Tensor::vector({cd})));
  CHECK(t.scalar(step.state) == doctest::Approx(h).epsilon(1e-14));
  auto p = softmax_values(t.value(step.logits).data());
  double total = 0;
  for (std::size_t w = 0; w < 5; ++w) {
    CHECK(p[w] == doctest::Approx(std::exp(logits[w]) / norm).epsilon(1e-13));
    CHECK(p[w] > 0);
    total += p[w];
  }
  CHECK(std::abs(total - 1) < 1e-12);
  CHECK_THROWS_AS(dec.decode_step(t, 5, step.state, t.constant(Tensor::vector({c0, c1})),
                                  t.constant(Tensor::vector({cd}))),
                  std::out_of_range);
}

TEST_CASE("decode step: zero output layer gives a uniform distribution") {
  Rng rng(5);
  ParamSet ps;
  Decoder dec(ps, decoder_config(2, 3, 9), rng);
  ps[dec.w_out].value.fill(0);
  ps[dec.b_out].value.fill(0);
  Tape t(&ps);
  auto step = dec.decode_step(t, 5, t.constant(random_tensor({3}, rng)), t.constant(random_tensor({4}, rng)),
                              t.constant(random_tensor({3}, rng)));
  for (Real p : softmax_values(t.value(step.logits).data())) CHECK(p == doctest::Approx(1.0 / 9).epsilon(1e-15));
}

TEST_CASE("greedy decode: degenerate first-step EOS is replaced") {
  Rng rng(6);
  ParamSet ps;
  Decoder dec(ps, decoder_config(2, 4), rng);
  ps[dec.w_out].value.fill(0);
  Tensor b({7});
  b[Vocabulary::kEos] = 5;
  b[Vocabulary::kBos] = 9;
  b[6] = 2;
  ps[dec.b_out].value = b;
  Tape t(&ps);
  auto states = constants(t, random_states(rng, 3, 4));
  auto sections = sections_from_labels(std::vector<int>{0, 1, 1});
  DecodeTrace trace;
  auto headings = dec.greedy_decode(t, states, sections, &trace);
  REQUIRE(headings.size() == 2);
  CHECK(headings[0] == std::vector<int>{6});
  CHECK(headings[1] == std::vector<int>{6});
  CHECK(trace.degenerate == std::vector<bool>{true, true});
}

TEST_CASE("greedy decode: max length cap and lowest-index ties") {
  Rng rng(7);
  ParamSet ps;
  ModelConfig c = decoder_config(2, 4);
  c.max_heading_len = 3;
  Decoder dec(ps, c, rng);
  ps[dec.w_out].value.fill(0);
  Tensor b({7});
  b[4] = 1;
  b[5] = 1;
  ps[dec.b_out].value = b;
  Tape t(&ps);
  auto states = constants(t, random_states(rng, 2, 4));
  auto headings = dec.greedy_decode(t, states, sections_from_labels(std::vector<int>{0, 1}));
  CHECK(headings == std::vector<std::vector<int>>{{4, 4, 4}});
}

TEST_CASE("property: attention weights normalized, review set growth, determinism") {
  Rng rng(8);
  for (auto dep : {HeadingDependency::kMarkov, HeadingDependency::kGlobal, HeadingDependency::kNone}) {
    ParamSet ps;
    ModelConfig c = decoder_config(2, 3);
    c.heading_dependency = dep;
    c.init_range = Real(1.5);
    Decoder dec(ps, c, rng);
    for (int trial = 0; trial < 15; ++trial) {
      const std::size_t m = 1 + rng.below(6);
      std::vector<int> labels(m);
      for (auto& l : labels) l = static_cast<int>(rng.below(2));
      labels.back() = 1;
      auto raw = random_states(rng, m, 4);
      auto sections = sections_from_labels(labels);

      DecodeTrace trace, again;
      Tape t(&ps);
      auto h1 = dec.greedy_decode(t, constants(t, raw), sections, &trace);
      Tape t2(&ps);
      auto h2 = dec.greedy_decode(t2, constants(t2, raw), sections, &again);
      CHECK(h1 == h2);
      REQUIRE(h1.size() == sections.size());

      std::size_t expected = 0;
      for (std::size_t n = 0; n < sections.size(); ++n) {
        CHECK_FALSE(h1[n].empty());
        expected += steps_taken(h1[n], trace.degenerate[n], c.max_heading_len);
        CHECK(trace.review_set_sizes[n] == expected);
        for (const auto& a : trace.section_attention[n]) {
          CHECK(a.size() == sections[n].size());
          CHECK(std::abs(std::accumulate(a.begin(), a.end(), 0.0) - 1) < 1e-12);
          for (Real w : a) CHECK(w >= 0);
        }
        for (const auto& b : trace.review_attention[n]) {
          if (b.empty()) continue;
          CHECK(std::abs(std::accumulate(b.begin(), b.end(), 0.0) - 1) < 1e-12);
          for (Real w : b) CHECK(w >= 0);
        }
      }
      CHECK(trace.review_attention[0][0].empty());
    }
  }
}

TEST_CASE("property: section attention ignores paragraphs outside the section") {
  Rng rng(9);
  ParamSet ps;
  ModelConfig c = decoder_config(2, 3);
  c.init_range = Real(1);
  Decoder dec(ps, c, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<int> labels{0, 1, 0, 0, 1, 1};
    auto sections = sections_from_labels(labels);
    auto raw = random_states(rng, 6, 4);
    DecodeTrace a, b;
    {
      Tape t(&ps);
      dec.greedy_decode(t, constants(t, raw), sections, &a);
    }
    // The first heading is decoded before any other section is visited.
    for (std::size_t j = 2; j < 6; ++j) raw[j] = random_tensor({4}, rng, -4, 4);
    {
      Tape t(&ps);
      dec.greedy_decode(t, constants(t, raw), sections, &b);
    }
    CHECK(a.section_attention[0] == b.section_attention[0]);
  }

  // With -R and -H every heading is a function of its own section only.
  ParamSet ps2;
  ModelConfig c2 = c;
  c2.ablate_review = true;
  c2.ablate_heading_dependency = true;
  Decoder local(ps2, c2, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<int> labels{0, 1, 0, 0, 1, 1};
    auto sections = sections_from_labels(labels);
    auto raw = random_states(rng, 6, 4);
    DecodeTrace a, b;
    std::vector<std::vector<int>> ha, hb;
    {
      Tape t(&ps2);
      ha = local.greedy_decode(t, constants(t, raw), sections, &a);
    }
    raw[0] = random_tensor({4}, rng, -4, 4);
    raw[5] = random_tensor({4}, rng, -4, 4);
    {
      Tape t(&ps2);
      hb = local.greedy_decode(t, constants(t, raw), sections, &b);
    }
    CHECK(a.section_attention[1] == b.section_attention[1]);
    CHECK(ha[1] == hb[1]);
  }
}

TEST_CASE("ablations zero their contexts and keep shapes") {
  Rng rng(10);
  struct Case {
    bool s, h, r;
  };
  for (Case k : {Case{true, false, false}, Case{false, true, false}, Case{false, false, true}, Case{true, true, true}}) {
    ParamSet ps;
    ModelConfig c = decoder_config(2, 3);
    c.ablate_section_attention = k.s;
    c.ablate_heading_dependency = k.h;
    c.ablate_review = k.r;
    Decoder dec(ps, c, rng);
    auto raw = random_states(rng, 4, 4);
    auto sections = sections_from_labels(std::vector<int>{1, 0, 1, 1});
    attention_counters().reset();
    DecodeTrace trace;
    Tape t(&ps);
    auto states = constants(t, raw);
    auto headings = dec.greedy_decode(t, states, sections, &trace);
    CHECK(headings.size() == 3);
    if (k.s) CHECK(attention_counters().section == 0);
    else CHECK(attention_counters().section > 0);
    if (k.r) CHECK(attention_counters().review == 0);
    else CHECK(attention_counters().review > 0);
    std::size_t tokens = 0;
    std::vector<std::vector<int>> gold{{4}, {5, 6}, {4}};
    Var nll = dec.heading_nll(t, states, sections, gold, &tokens);
    CHECK(tokens == 7);
    CHECK(std::isfinite(t.scalar(nll)));
  }
}

TEST_CASE("gradient check through a full two-heading decode") {
  Rng rng(11);
  for (auto dep : {HeadingDependency::kMarkov, HeadingDependency::kGlobal}) {
    ParamSet ps;
    ModelConfig c = decoder_config(1, 3, 6);
    c.heading_dependency = dep;
    Decoder dec(ps, c, rng);
    auto raw = random_states(rng, 3, 2);
    auto sections = sections_from_labels(std::vector<int>{0, 1, 1});
    const std::vector<std::vector<int>> gold{{4, 5}, {5}};
    auto report = grad_check(
        [&](Tape& t) { return dec.heading_nll(t, constants(t, raw), sections, gold); }, ps);
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("uniform output distribution gives ln V per token") {
  Rng rng(12);
  ParamSet ps;
  Decoder dec(ps, decoder_config(2, 4, 11), rng);
  ps[dec.w_out].value.fill(0);
  ps[dec.b_out].value.fill(0);
  Tape t(&ps);
  auto states = constants(t, random_states(rng, 2, 4));
  std::size_t tokens = 0;
  Var nll = dec.heading_nll(t, states, sections_from_labels(std::vector<int>{0, 1}), {{4, 7, 9}}, &tokens);
  CHECK(tokens == 4);
  CHECK(t.scalar(nll) / 4 == doctest::Approx(std::log(11.0)).epsilon(1e-14));
}

}  // TEST_SUITE
