// Generated corpora with known structure: templated topic documents for
// overfit and ablation runs, and a wikitext fixture with designed statistics
// for the corpus pipeline.

#ifndef OG_SYNTHETIC_HPP
#define OG_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "og/corpus.hpp"
#include "og/tensor.hpp"

namespace og {

struct Topic {
  Tokens heading;
  Tokens words;
};

// Twelve topics with disjoint word lists.
const std::vector<Topic>& synthetic_topics();

// An article type: an ordered list of topic indices. Documents keep a random
// ordered subset of it.
struct ArticleTemplate {
  std::string name;
  std::vector<std::size_t> topics;
};

// Biography, city and music templates of six sections each.
const std::vector<ArticleTemplate>& synthetic_templates();

struct TemplateOptions {
  std::size_t min_sections = 3;
  std::size_t max_sections = 6;
  std::size_t min_section_paragraphs = 1;
  std::size_t max_section_paragraphs = 3;
  std::size_t min_words = 6;
  std::size_t max_words = 10;
  // Chance of each word being a shared filler word instead of a topic word.
  double filler_rate = 0.0;
};

// Each document picks a template and an ordered subset of its topics; a
// section's paragraphs sample words from its topic and its heading is the
// topic heading.
std::vector<OutlineExample> template_corpus(std::size_t documents, std::uint64_t seed,
                                            const TemplateOptions& options = {});

struct WikitextFixture {
  std::string text;                       // concatenated dump with @article delimiters
  std::size_t articles = 0;
  std::vector<std::size_t> kept_sections;  // designed first-level section counts of kept articles
  double mean_sections() const;
};

// Articles with a title line, lead paragraphs, 1-8 first-level sections,
// occasional second-level subsections and digit tokens; about one in twenty
// has no heading and one in twenty has 11-12 headings (both filtered out).
WikitextFixture wikitext_fixture(std::size_t articles, std::uint64_t seed);

// A fixed 4-paragraph, 2-section document.
OutlineExample gradcheck_document();

}  // namespace og

#endif  // OG_SYNTHETIC_HPP
