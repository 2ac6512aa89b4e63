// Corpus construction: heading-annotated articles to
// <paragraphs, boundary labels, headings> examples, token preprocessing,
// vocabularies, splits, and the line-delimited JSON record format.

#ifndef OG_CORPUS_HPP
#define OG_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

namespace og {

using Tokens = std::vector<std::string>;

struct Block {
  enum class Kind { kHeading, kParagraph };
  Kind kind = Kind::kParagraph;
  int level = 0;  // headings only; 1 is first level
  std::string text;

  static Block heading(int level, std::string text) { return {Kind::kHeading, level, std::move(text)}; }
  static Block paragraph(std::string text) { return {Kind::kParagraph, 0, std::move(text)}; }
};

struct RawArticle {
  std::string id;
  std::string category = "mixture";
  std::vector<Block> blocks;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutlineExample {
  std::string id;
  std::string category;
  std::vector<Tokens> paragraphs;
  std::vector<int> labels;
  std::vector<Tokens> headings;

  std::size_t num_paragraphs() const { return paragraphs.size(); }
  std::size_t num_sections() const { return headings.size(); }
  // Throws CorpusError when the structural invariants do not hold.
  void validate() const;

  friend bool operator==(const OutlineExample&, const OutlineExample&) = default;
};

inline constexpr std::size_t kMaxFirstLevelHeadings = 10;

enum class Rejection { kNoHeadings, kTooManyHeadings, kEmptyHeading };
std::string_view rejection_name(Rejection r);

using ParseResult = std::variant<OutlineExample, Rejection>;

// Whitespace split, lowercase, strip characters outside [a-z0-9'-], drop
// tokens that are empty or made only of digits.
Tokens preprocess_tokens(std::string_view text);

// Keeps first-level headings only; deeper headings are dropped and their
// paragraphs stay in the enclosing section. Paragraphs before the first
// first-level heading, paragraphs that preprocess to nothing, and headings
// with no paragraphs are dropped.
ParseResult parse_article(const RawArticle& raw);

enum class FilterDecision { kKeep, kDrop };
FilterDecision filter_article(const OutlineExample& example);

// ---------------------------------------------------------------------------
// Vocabulary

enum class VocabSide { kDocument, kHeading };

inline constexpr std::size_t kPaperDocVocab = 130000;
inline constexpr std::size_t kPaperHeadVocab = 16000;

class TokenCounter {
 public:
  void add(const std::string& token, std::size_t n = 1) { counts_[token] += n; }
  void add(const Tokens& tokens);
  void merge(const TokenCounter& other);
  const std::unordered_map<std::string, std::size_t>& counts() const { return counts_; }

 private:
  std::unordered_map<std::string, std::size_t> counts_;
};

class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kPad = 3;
  static constexpr int kNumSpecials = 4;

  Vocabulary();
  // Top `size` tokens by descending count, ties broken lexicographically.
  static Vocabulary from_counts(const TokenCounter& counter, std::size_t size);

  std::size_t size() const { return tokens_.size(); }
  int index(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::vector<int> encode(const Tokens& tokens) const;
  Tokens decode(std::span<const int> ids) const;

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void push(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

Vocabulary build_vocab(std::span<const OutlineExample> corpus, VocabSide side, std::size_t size);

// ---------------------------------------------------------------------------
// Splits

struct CorpusSplit {
  std::vector<OutlineExample> train;
  std::vector<OutlineExample> dev;
  std::vector<OutlineExample> test;
};

inline constexpr std::size_t kMinSplitExamples = 10;

// Seeded shuffle, then floor(10%) dev, floor(10%) test, remainder train.
CorpusSplit split_corpus(std::vector<OutlineExample> examples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Input reading

enum class HeadingStyle { kWikitext, kMarkdown };

// Parses one source text. Lines of the form "@article id=ID category=CAT"
// start a new article; text before the first such line (or the whole text if
// there is none) becomes one article named `default_id`. Wikitext headings
// are "== h ==" (level 1), "=== h ===" (level 2), ...; markdown headings are
// "# h" (level 1), "## h" (level 2), .... Blank lines separate paragraphs.
std::vector<RawArticle> read_articles(std::istream& in, const std::string& default_id,
                                      const std::string& default_category,
                                      HeadingStyle style = HeadingStyle::kWikitext);

// Reads every regular file of `dir` in lexicographic path order.
std::vector<RawArticle> read_article_dir(const std::filesystem::path& dir,
                                         const std::string& default_category,
                                         HeadingStyle style = HeadingStyle::kWikitext);

// ---------------------------------------------------------------------------
// Records

nlohmann::json example_to_json(const OutlineExample& example);
OutlineExample example_from_json(const nlohmann::json& j);

void write_jsonl(std::ostream& out, std::span<const OutlineExample> examples);
// Lines holding a "provenance" object are skipped.
std::vector<OutlineExample> read_jsonl(std::istream& in);
std::vector<OutlineExample> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const OutlineExample> examples);

struct CorpusStats {
  std::size_t articles = 0;
  std::size_t doc_vocab = 0;
  std::size_t outline_vocab = 0;
  double article_avg_sections = 0;
  double article_avg_paragraphs = 0;
  double section_avg_paragraphs = 0;
  double heading_avg_words = 0;
};

CorpusStats compute_stats(std::span<const OutlineExample> examples);
nlohmann::json stats_to_json(const CorpusStats& stats);

}  // namespace og

#endif  // OG_CORPUS_HPP
