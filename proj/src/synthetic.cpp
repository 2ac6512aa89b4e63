#include "og/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace og {

namespace {

Tokens split_words(const std::string& s) {
  std::istringstream in(s);
  Tokens out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

const Tokens& fillers() {
  static const Tokens words = split_words("the of and in a to was with for on");
  return words;
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

Tokens sample_paragraph(Rng& rng, const Topic& topic, const TemplateOptions& o) {
  Tokens p;
  const std::size_t n = between(rng, o.min_words, o.max_words);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < o.filler_rate) p.push_back(fillers()[rng.below(fillers().size())]);
    else p.push_back(topic.words[rng.below(topic.words.size())]);
  }
  return p;
}

}  // namespace

const std::vector<Topic>& synthetic_topics() {
  static const std::vector<Topic> topics = [] {
    const char* table[][2] = {
        {"early life", "born childhood parents family raised village school siblings father mother"},
        {"career", "debut signed contract team season performed hired promoted role studio"},
        {"personal life", "married wife husband children divorce relationship home dated engaged son"},
        {"history", "founded century empire war kingdom ancient settlers colonial dynasty ruled"},
        {"geography", "river mountain valley coast elevation lake terrain plain north border"},
        {"economy", "industry trade market exports jobs tourism factories gdp banking revenue"},
        {"discography", "album single released label tracks chart ep records remix compilation"},
        {"reception", "critics praised reviews acclaim rating audience negative positive panned review"},
        {"awards", "award won nominated prize honor grammy trophy ceremony medal winner"},
        {"education", "university degree studied college graduated campus professor thesis academy scholarship"},
        {"legacy", "influence remembered inspired tribute memorial impact honored generations later icon"},
        {"climate", "rainfall temperature summer winter humid dry monsoon snow weather seasonal"},
    };
    std::vector<Topic> out;
    for (auto& s : table) out.push_back({split_words(s[0]), split_words(s[1])});
    return out;
  }();
  return topics;
}

const std::vector<ArticleTemplate>& synthetic_templates() {
  // Indices into synthetic_topics().
  static const std::vector<ArticleTemplate> templates = {
      {"biography", {0, 9, 1, 2, 8, 10}},
      {"city", {3, 4, 11, 5, 9, 10}},
      {"music", {3, 1, 6, 7, 8, 10}},
  };
  return templates;
}

std::vector<OutlineExample> template_corpus(std::size_t documents, std::uint64_t seed, const TemplateOptions& o) {
  const auto& topics = synthetic_topics();
  const auto& templates = synthetic_templates();
  if (o.min_sections == 0 || o.min_sections > o.max_sections || o.max_sections > templates[0].topics.size())
    throw std::invalid_argument("section range must lie in [1, topic count]");
  if (o.min_section_paragraphs == 0 || o.min_section_paragraphs > o.max_section_paragraphs ||
      o.min_words == 0 || o.min_words > o.max_words)
    throw std::invalid_argument("invalid template ranges");

  Rng root(seed);
  std::vector<OutlineExample> out;
  for (std::size_t d = 0; d < documents; ++d) {
    Rng rng = root.split(d);
    const ArticleTemplate& tpl = templates[rng.below(templates.size())];
    const std::size_t sections = between(rng, o.min_sections, o.max_sections);
    // Ordered subset: shuffle positions, keep the first `sections`, re-sort.
    std::vector<std::size_t> pick(tpl.topics.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    rng.shuffle(pick);
    pick.resize(sections);
    std::sort(pick.begin(), pick.end());

    OutlineExample ex;
    ex.id = "synthetic-" + std::to_string(seed) + "-" + std::to_string(d);
    ex.category = tpl.name;
    for (std::size_t s = 0; s < sections; ++s) {
      const Topic& topic = topics[tpl.topics[pick[s]]];
      const std::size_t paras = between(rng, o.min_section_paragraphs, o.max_section_paragraphs);
      for (std::size_t p = 0; p < paras; ++p) {
        ex.paragraphs.push_back(sample_paragraph(rng, topic, o));
        ex.labels.push_back(p + 1 == paras ? 1 : 0);
      }
      ex.headings.push_back(topic.heading);
    }
    ex.validate();
    out.push_back(std::move(ex));
  }
  return out;
}

double WikitextFixture::mean_sections() const {
  if (kept_sections.empty()) return 0;
  double s = 0;
  for (auto n : kept_sections) s += static_cast<double>(n);
  return s / static_cast<double>(kept_sections.size());
}

WikitextFixture wikitext_fixture(std::size_t articles, std::uint64_t seed) {
  const auto& topics = synthetic_topics();
  TemplateOptions words;
  Rng root(seed);
  WikitextFixture fx;
  fx.articles = articles;
  std::ostringstream out;

  auto paragraph = [&](Rng& rng, const Topic& topic) {
    Tokens p = sample_paragraph(rng, topic, words);
    std::string line;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) line += ' ';
      // Capitals and digits exercise the preprocessing rules.
      if (i == 0) line += static_cast<char>(p[i][0] - 'a' + 'A') + p[i].substr(1);
      else line += p[i];
      if (rng.below(8) == 0) line += " " + std::to_string(1900 + rng.below(120));
    }
    return line + ".";
  };

  for (std::size_t a = 0; a < articles; ++a) {
    Rng rng = root.split(a);
    const std::size_t kind = rng.below(20);
    std::size_t sections;
    if (kind == 0) sections = 0;
    else if (kind == 1) sections = 11 + rng.below(2);
    else sections = 1 + rng.below(8);

    out << "@article id=wiki-" << a << " category=mixture\n";
    out << "= Article " << a << " =\n\n";
    out << paragraph(rng, topics[rng.below(topics.size())]) << "\n\n";
    for (std::size_t s = 0; s < sections; ++s) {
      const Topic& topic = topics[(a + s) % topics.size()];
      std::string heading;
      for (const auto& w : topic.heading) heading += (heading.empty() ? "" : " ") + w;
      out << "== " << heading << " ==\n\n";
      const std::size_t paras = 1 + rng.below(3);
      for (std::size_t p = 0; p < paras; ++p) out << paragraph(rng, topic) << "\n\n";
      if (rng.below(4) == 0) {
        out << "=== Details ===\n\n" << paragraph(rng, topic) << "\n\n";
      }
    }
    if (sections >= 1 && sections <= kMaxFirstLevelHeadings) fx.kept_sections.push_back(sections);
  }
  fx.text = out.str();
  return fx;
}

OutlineExample gradcheck_document() {
  OutlineExample ex;
  ex.id = "gradcheck";
  ex.category = "synthetic";
  ex.paragraphs = {split_words("born village parents school"), split_words("raised family siblings"),
                   split_words("debut signed contract season team"), split_words("promoted role studio")};
  ex.labels = {0, 1, 0, 1};
  ex.headings = {split_words("early life"), split_words("career")};
  ex.validate();
  return ex;
}

}  // namespace og
