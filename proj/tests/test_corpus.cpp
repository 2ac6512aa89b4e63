#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "og/corpus.hpp"
#include "og/synthetic.hpp"
#include "support.hpp"

using namespace og;
using og::test::words;

namespace {

RawArticle article(std::vector<Block> blocks) {
  RawArticle a;
  a.id = "t";
  a.blocks = std::move(blocks);
  return a;
}

OutlineExample sections_example(std::size_t n) {
  OutlineExample ex;
  ex.id = "n" + std::to_string(n);
  for (std::size_t i = 0; i < n; ++i) {
    ex.paragraphs.push_back({"w"});
    ex.labels.push_back(1);
    ex.headings.push_back({"h"});
  }
  return ex;
}

OutlineExample tiny(const std::string& id) {
  OutlineExample ex;
  ex.id = id;
  ex.category = "mixture";
  ex.paragraphs = {words("a b"), words("c")};
  ex.labels = {0, 1};
  ex.headings = {words("x y")};
  return ex;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("parse_article: first-level sections") {
  auto r = parse_article(article({Block::heading(1, "early life"), Block::paragraph("a"), Block::paragraph("b"),
                                  Block::heading(1, "career"), Block::paragraph("c")}));
  auto* ex = std::get_if<OutlineExample>(&r);
  REQUIRE(ex);
  CHECK(ex->paragraphs == std::vector<Tokens>{{"a"}, {"b"}, {"c"}});
  CHECK(ex->labels == std::vector<int>{0, 1, 1});
  CHECK(ex->headings == std::vector<Tokens>{words("early life"), words("career")});
}

TEST_CASE("parse_article: deeper headings merge into the enclosing section") {
  auto r = parse_article(
      article({Block::heading(1, "x"), Block::paragraph("a"), Block::heading(2, "y"), Block::paragraph("b")}));
  auto* ex = std::get_if<OutlineExample>(&r);
  REQUIRE(ex);
  CHECK(ex->labels == std::vector<int>{0, 1});
  CHECK(ex->headings == std::vector<Tokens>{{"x"}});
}

TEST_CASE("parse_article: rejections") {
  auto none = parse_article(article({Block::paragraph("a")}));
  REQUIRE(std::holds_alternative<Rejection>(none));
  CHECK(std::get<Rejection>(none) == Rejection::kNoHeadings);

  std::vector<Block> many;
  for (int i = 0; i < 11; ++i) {
    many.push_back(Block::heading(1, "h" + std::string(1, static_cast<char>('a' + i))));
    many.push_back(Block::paragraph("p"));
  }
  auto too_many = parse_article(article(many));
  REQUIRE(std::holds_alternative<Rejection>(too_many));
  CHECK(std::get<Rejection>(too_many) == Rejection::kTooManyHeadings);

  auto digits = parse_article(article({Block::heading(1, "1989"), Block::paragraph("a")}));
  REQUIRE(std::holds_alternative<Rejection>(digits));
  CHECK(std::get<Rejection>(digits) == Rejection::kEmptyHeading);
}

TEST_CASE("parse_article: lead paragraphs and empty sections are dropped") {
  auto r = parse_article(article({Block::paragraph("lead text"), Block::heading(1, "a"), Block::heading(1, "b"),
                                  Block::paragraph("1999"), Block::paragraph("body")}));
  auto* ex = std::get_if<OutlineExample>(&r);
  REQUIRE(ex);
  CHECK(ex->paragraphs == std::vector<Tokens>{{"body"}});
  CHECK(ex->headings == std::vector<Tokens>{{"b"}});
}

TEST_CASE("filter_article boundaries") {
  CHECK(filter_article(sections_example(10)) == FilterDecision::kKeep);
  CHECK(filter_article(sections_example(11)) == FilterDecision::kDrop);
  CHECK(filter_article(sections_example(1)) == FilterDecision::kKeep);
  CHECK(filter_article(sections_example(0)) == FilterDecision::kDrop);
}

TEST_CASE("preprocess_tokens") {
  CHECK(preprocess_tokens("Taylor Swift 1989") == words("taylor swift"));
  CHECK(preprocess_tokens("").empty());
  CHECK(preprocess_tokens("Café-Bar") == Tokens{"caf-bar"});
  CHECK(preprocess_tokens("  It's  the\t1990s!\n") == words("it's the 1990s"));
  CHECK(preprocess_tokens("12,000 ©") .empty());
}

TEST_CASE("property: preprocessed tokens use only the kept character class") {
  Rng rng(9);
  const std::string alphabet = "aZ09'-é!,. \t\nQxÅ";
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const std::size_t n = rng.below(40);
    for (std::size_t i = 0; i < n; ++i) text += alphabet[rng.below(alphabet.size())];
    for (const auto& tok : preprocess_tokens(text)) {
      CHECK_FALSE(tok.empty());
      bool digits_only = true;
      for (char c : tok) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'' || c == '-';
        CHECK(ok);
        digits_only = digits_only && c >= '0' && c <= '9';
      }
      CHECK_FALSE(digits_only);
    }
  }
}

TEST_CASE("build_vocab: frequency order, ties, UNK") {
  OutlineExample ex;
  ex.paragraphs = {words("a a a b")};
  ex.labels = {1};
  ex.headings = {words("h")};
  std::vector<OutlineExample> corpus{ex};
  auto v = build_vocab(corpus, VocabSide::kDocument, 1);
  CHECK(v.size() == 5);
  CHECK(v.index("a") == 4);
  CHECK(v.index("b") == Vocabulary::kUnk);

  corpus[0].paragraphs = {words("b b a a")};
  auto tie = build_vocab(corpus, VocabSide::kDocument, 1);
  CHECK(tie.contains("a"));
  CHECK_FALSE(tie.contains("b"));

  auto heads = build_vocab(corpus, VocabSide::kHeading, 10);
  CHECK(heads.size() == 5);
  CHECK(heads.index("h") == 4);
  CHECK_THROWS(build_vocab(corpus, VocabSide::kDocument, 0));
}

TEST_CASE("vocabulary specials, defaults and bijection") {
  Vocabulary v;
  CHECK(v.size() == 4);
  CHECK(v.index("<unk>") == Vocabulary::kUnk);
  CHECK(v.token(Vocabulary::kBos) == "<bos>");
  CHECK(v.token(Vocabulary::kEos) == "<eos>");
  CHECK(v.token(Vocabulary::kPad) == "<pad>");
  CHECK(kPaperDocVocab == 130000);
  CHECK(kPaperHeadVocab == 16000);

  auto corpus = template_corpus(20, 3);
  auto dv = build_vocab(corpus, VocabSide::kDocument, 50);
  std::set<std::string> seen;
  for (std::size_t i = Vocabulary::kNumSpecials; i < dv.size(); ++i) {
    const auto& tok = dv.token(static_cast<int>(i));
    CHECK(seen.insert(tok).second);
    CHECK(dv.index(tok) == static_cast<int>(i));
  }
  std::stringstream ss;
  dv.save(ss);
  CHECK(Vocabulary::load(ss) == dv);
}

TEST_CASE("property: UNK closure") {
  auto corpus = template_corpus(30, 4);
  auto dv = build_vocab(corpus, VocabSide::kDocument, 15);
  auto hv = build_vocab(corpus, VocabSide::kHeading, 3);
  auto other = template_corpus(30, 5, TemplateOptions{.filler_rate = 0.5});
  for (const auto& ex : other) {
    for (const auto& p : ex.paragraphs)
      for (int id : dv.encode(p)) CHECK(static_cast<std::size_t>(id) < dv.size());
    for (const auto& h : ex.headings)
      for (int id : hv.encode(h)) CHECK(static_cast<std::size_t>(id) < hv.size());
  }
}

TEST_CASE("split_corpus sizes and determinism") {
  auto make = [](std::size_t n) {
    std::vector<OutlineExample> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(tiny("d" + std::to_string(i)));
    return v;
  };
  auto ten = split_corpus(make(10), 1);
  CHECK(ten.train.size() == 8);
  CHECK(ten.dev.size() == 1);
  CHECK(ten.test.size() == 1);
  auto big = split_corpus(make(103), 1);
  CHECK(big.train.size() == 83);
  CHECK(big.dev.size() == 10);
  CHECK(big.test.size() == 10);
  auto again = split_corpus(make(103), 1);
  CHECK(again.train == big.train);
  CHECK(again.dev == big.dev);
  CHECK(again.test == big.test);
  auto other = split_corpus(make(103), 2);
  CHECK(other.train != big.train);
  CHECK_THROWS_AS(split_corpus(make(9), 1), CorpusError);

  std::set<std::string> ids;
  for (const auto* part : {&big.train, &big.dev, &big.test})
    for (const auto& e : *part) CHECK(ids.insert(e.id).second);
  CHECK(ids.size() == 103);
}

TEST_CASE("jsonl round-trip is identity") {
  auto corpus = template_corpus(12, 6);
  std::stringstream ss;
  write_jsonl(ss, corpus);
  CHECK(read_jsonl(ss) == corpus);
}

TEST_CASE("records are validated on load") {
  auto bad = [](const char* line) {
    std::stringstream ss(line);
    return read_jsonl(ss);
  };
  CHECK_THROWS_AS(bad(R"({"id":"x","category":"c","paragraphs":[["a"],["b"]],"labels":[1,1],"headings":[["h"]]})"),
                  CorpusError);
  CHECK_THROWS_AS(bad(R"({"id":"x","category":"c","paragraphs":[["a"]],"labels":[0],"headings":[]})"), CorpusError);
  CHECK_THROWS_AS(bad(R"({"id":"x","category":"c","paragraphs":[["a"]],"labels":[1],"headings":[[]]})"), CorpusError);
  CHECK_THROWS_AS(bad("not json"), CorpusError);
  CHECK(bad(R"({"provenance":{"seed":1}})").empty());
}

TEST_CASE("read_articles: wikitext and markdown markup") {
  std::istringstream wiki(
      "@article id=one category=music\n= Title =\n\nLead.\n\n== History ==\n\nFirst para\nstill first.\n\n"
      "=== Detail ===\nSecond.\n@article id=two\n== A ==\nx\n");
  auto arts = read_articles(wiki, "file", "mixture");
  REQUIRE(arts.size() == 2);
  CHECK(arts[0].id == "one");
  CHECK(arts[0].category == "music");
  CHECK(arts[1].category == "mixture");
  auto r = parse_article(arts[0]);
  auto* ex = std::get_if<OutlineExample>(&r);
  REQUIRE(ex);
  CHECK(ex->headings == std::vector<Tokens>{{"history"}});
  CHECK(ex->paragraphs == std::vector<Tokens>{words("first para still first"), {"second"}});

  std::istringstream md("# Early life\nBorn.\n\n## Sub\nMore.\n# Career\nWork.\n");
  auto mds = read_articles(md, "doc", "mixture", HeadingStyle::kMarkdown);
  REQUIRE(mds.size() == 1);
  CHECK(mds[0].id == "doc");
  auto rm = parse_article(mds[0]);
  REQUIRE(std::holds_alternative<OutlineExample>(rm));
  CHECK(std::get<OutlineExample>(rm).labels == std::vector<int>{0, 1, 1});
}

TEST_CASE("corpus statistics on a hand corpus") {
  std::vector<OutlineExample> v{tiny("a"), tiny("b")};
  v[1].paragraphs = {words("a"), words("b"), words("c")};
  v[1].labels = {1, 0, 1};
  v[1].headings = {words("x"), words("y z w")};
  auto s = compute_stats(v);
  CHECK(s.articles == 2);
  CHECK(s.article_avg_sections == doctest::Approx(1.5));
  CHECK(s.article_avg_paragraphs == doctest::Approx(2.5));
  CHECK(s.section_avg_paragraphs == doctest::Approx(5.0 / 3));
  CHECK(s.heading_avg_words == doctest::Approx(2.0));
}

TEST_CASE("synthetic template corpus satisfies the example invariants") {
  auto corpus = template_corpus(40, 8);
  for (const auto& ex : corpus) {
    CHECK_NOTHROW(ex.validate());
    CHECK(ex.num_sections() >= 3);
    CHECK(ex.num_sections() <= 6);
  }
  CHECK(template_corpus(5, 8) == template_corpus(5, 8));
}

}  // TEST_SUITE
