#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "og/baselines.hpp"
#include "og/decoder.hpp"
#include "og/synthetic.hpp"
#include "support.hpp"

using namespace og;
using og::test::words;

namespace {

// Solves (I - d P) s = (1 - d) 1 directly, P[i][j] = w_ij / sum_k w_jk, with
// the graph rebuilt from the token stream.
std::map<std::string, double> textrank_oracle(const Tokens& tokens, std::size_t window, double d) {
  std::map<std::string, std::map<std::string, double>> w;
  for (const auto& t : tokens) w[t];
  for (std::size_t i = 0; i < tokens.size(); ++i)
    for (std::size_t j = i + 1; j < std::min(tokens.size(), i + window); ++j)
      if (tokens[i] != tokens[j]) w[tokens[i]][tokens[j]] += 1, w[tokens[j]][tokens[i]] += 1;

  std::vector<std::string> names;
  for (const auto& [k, v] : w) names.push_back(k);
  const std::size_t n = names.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1;
    a[i][n] = 1 - d;
    for (std::size_t j = 0; j < n; ++j) {
      double out = 0;
      for (const auto& [k, x] : w[names[j]]) out += x;
      auto it = w[names[i]].find(names[j]);
      if (it != w[names[i]].end()) a[i][j] -= d * it->second / out;
    }
  }
  // Gaussian elimination with partial pivoting.
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < n; ++i) out[names[i]] = a[i][n] / a[i][i];
  return out;
}

Tokens random_tokens(Rng& rng, std::size_t length, std::size_t alphabet) {
  Tokens out;
  for (std::size_t i = 0; i < length; ++i) out.push_back(std::string(1, static_cast<char>('a' + rng.below(alphabet))));
  return out;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("word graph construction") {
  auto g = WordGraph::build(words("b a c a"), 2);
  REQUIRE(g.nodes == Tokens{"a", "b", "c"});
  CHECK(g.edges[0].at(1) == 1);
  CHECK(g.edges[0].at(2) == 2);
  CHECK(g.edges[1].count(2) == 0);
  auto g3 = WordGraph::build(words("b a c"), 3);
  CHECK(g3.edges[1].at(2) == 1);
  CHECK_THROWS_AS(WordGraph::build(words("a b"), 1), std::invalid_argument);
}

TEST_CASE("textrank matches a linear-solve oracle on random graphs") {
  Rng rng(17);
  TextRankConfig cfg;
  cfg.max_iterations = 500;
  cfg.tolerance = Real(1e-12);
  for (int trial = 0; trial < 5; ++trial) {
    Tokens toks;
    do toks = random_tokens(rng, 8 + rng.below(10), 3 + rng.below(4));
    while (std::all_of(toks.begin(), toks.end(), [&](const auto& t) { return t == toks[0]; }));
    auto g = WordGraph::build(toks, cfg.window);
    auto r = textrank_scores(g, cfg);
    auto oracle = textrank_oracle(toks, cfg.window, cfg.damping);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::fabs(r.scores[i] - oracle.at(g.nodes[i])) < 1e-6);
  }
}

TEST_CASE("property: converged scores sum to the node count") {
  Rng rng(5);
  TextRankConfig cfg;
  cfg.tolerance = Real(1e-12);
  cfg.max_iterations = 1000;
  for (int trial = 0; trial < 20; ++trial) {
    Tokens toks = random_tokens(rng, 6 + rng.below(20), 2 + rng.below(6));
    auto g = WordGraph::build(toks, 2 + rng.below(3));
    bool isolated = false;
    for (const auto& e : g.edges) isolated = isolated || e.empty();
    if (isolated) continue;
    auto r = textrank_scores(g, cfg);
    double s = 0;
    for (Real v : r.scores) s += v;
    CHECK(s == doctest::Approx(static_cast<double>(g.size())).epsilon(1e-9));
  }
}

TEST_CASE("textrank deltas shrink and stop at tolerance") {
  TextRankConfig cfg;
  auto g = WordGraph::build(words("a b c a d b e a"), 2);
  auto r = textrank_scores(g, cfg);
  REQUIRE(r.iterations == r.deltas.size());
  CHECK(r.deltas.back() < cfg.tolerance);
  CHECK(r.iterations < cfg.max_iterations);
}

TEST_CASE("textrank headings") {
  TextRankConfig cfg;
  SUBCASE("single repeated word") {
    CHECK(textrank_heading(words("music music music"), cfg) == Tokens{"music"});
  }
  SUBCASE("two-cycle tie resolves lexicographically") {
    CHECK(textrank_heading(words("b a b a"), cfg) == Tokens{"a", "b"});
  }
  SUBCASE("hub word ranks first") {
    auto h = textrank_heading(words("x hub y hub z hub w"), cfg);
    REQUIRE(h.size() == 2);
    CHECK(h[0] == "hub");
  }
  SUBCASE("shorter than the window falls back to frequency") {
    TextRankConfig wide = cfg;
    wide.window = 5;
    CHECK(textrank_heading(words("b a b"), wide) == Tokens{"b"});
  }
  CHECK_THROWS_AS(textrank_heading({}, cfg), std::invalid_argument);
}

TEST_CASE("generate-then-aggregate merges heading runs") {
  const Tokens a{"a"}, b{"b"};
  auto r1 = merge_heading_runs({a, a, b});
  CHECK(r1.labels == std::vector<int>{0, 1, 1});
  CHECK(r1.headings == std::vector<Tokens>{a, b});
  auto r2 = merge_heading_runs({a, b, a});
  CHECK(r2.labels == std::vector<int>{1, 1, 1});
  CHECK(r2.headings == std::vector<Tokens>{a, b, a});
  auto r3 = merge_heading_runs({a, a, b, a});
  CHECK(r3.labels == std::vector<int>{0, 1, 1, 1});
  CHECK(r3.headings == std::vector<Tokens>{a, b, a});
  CHECK_THROWS_AS(merge_heading_runs({}), std::invalid_argument);

  // with a heading method that returns each paragraph's first word
  SectionHeadingFn first_word = [](const std::vector<Tokens>& paragraphs, std::span<const int> labels) {
    std::vector<Tokens> out;
    for (const auto& s : sections_from_labels(labels)) out.push_back({paragraphs[s.begin][0]});
    return out;
  };
  auto ga = ga_pipeline({words("a x"), words("a y"), words("b z")}, first_word);
  CHECK(ga.labels == std::vector<int>{0, 1, 1});
  CHECK(ga.headings == std::vector<Tokens>{a, b});
}

TEST_CASE("identify-then-generate composes boundaries and textrank") {
  auto docs = template_corpus(3, 9);
  auto dv = build_vocab(docs, VocabSide::kDocument, 200);
  auto hv = build_vocab(docs, VocabSide::kHeading, 50);
  ModelConfig mc;
  mc.doc_vocab = dv.size();
  mc.head_vocab = hv.size();
  mc.word_emb = mc.head_emb = mc.hidden = 4;
  mc.dec_hidden = mc.attn = 4;
  mc.boundary = BoundaryVariant::kCrf;
  OutlineModel model(mc, 3);
  TextRankConfig cfg;

  for (const auto& d : docs) {
    std::vector<std::vector<int>> ids;
    for (const auto& p : d.paragraphs) ids.push_back(dv.encode(p));
    auto labels = model.predict_boundaries(ids).labels;
    auto ig = ig_pipeline(d.paragraphs, labels, textrank_method(cfg));
    CHECK(ig.labels == labels);

    std::vector<Tokens> expected;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i]) continue;
      Tokens text;
      for (std::size_t p = begin; p <= i; ++p) text.insert(text.end(), d.paragraphs[p].begin(), d.paragraphs[p].end());
      expected.push_back(textrank_heading(text, cfg));
      begin = i + 1;
    }
    CHECK(ig.headings == expected);

    // gold boundaries pass through untouched as well
    CHECK(ig_pipeline(d.paragraphs, d.labels, textrank_method(cfg)).labels == d.labels);
  }
  CHECK_THROWS_AS(ig_pipeline(docs[0].paragraphs, std::vector<int>{1}, textrank_method(cfg)), std::invalid_argument);
}

TEST_CASE("neural heading method follows the given segmentation") {
  auto docs = template_corpus(2, 10);
  auto dv = build_vocab(docs, VocabSide::kDocument, 200);
  auto hv = build_vocab(docs, VocabSide::kHeading, 50);
  ModelConfig mc;
  mc.doc_vocab = dv.size();
  mc.head_vocab = hv.size();
  mc.word_emb = mc.head_emb = mc.hidden = mc.dec_hidden = mc.attn = 4;
  OutlineModel model(mc, 4);
  auto method = neural_method(model, dv, hv);
  const auto& d = docs[0];
  auto ig = ig_pipeline(d.paragraphs, d.labels, method);
  CHECK(ig.headings.size() == d.headings.size());
  auto ga = ga_pipeline(d.paragraphs, method);
  CHECK(ga.labels.size() == d.paragraphs.size());
  CHECK(ga.labels.back() == 1);
}

}  // TEST_SUITE
