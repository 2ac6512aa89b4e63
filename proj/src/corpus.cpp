#include "og/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "og/tensor.hpp"

namespace og {

void OutlineExample::validate() const {
  const std::size_t m = paragraphs.size();
  if (m == 0) throw CorpusError("example " + id + ": no paragraphs");
  if (labels.size() != m) {
    throw CorpusError("example " + id + ": " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(m) + " paragraphs");
  }
  std::size_t ones = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw CorpusError("example " + id + ": label outside {0,1}");
    ones += static_cast<std::size_t>(l);
  }
  if (ones != headings.size()) {
    throw CorpusError("example " + id + ": " + std::to_string(ones) + " boundaries but " +
                      std::to_string(headings.size()) + " headings");
  }
  if (labels.back() != 1) throw CorpusError("example " + id + ": last paragraph must close a section");
  for (const auto& p : paragraphs) {
    if (p.empty()) throw CorpusError("example " + id + ": empty paragraph");
  }
  for (const auto& h : headings) {
    if (h.empty()) throw CorpusError("example " + id + ": empty heading");
  }
}

std::string_view rejection_name(Rejection r) {
  switch (r) {
    case Rejection::kNoHeadings: return "no-headings";
    case Rejection::kTooManyHeadings: return "too-many-headings";
    case Rejection::kEmptyHeading: return "empty-heading";
  }
  return "unknown";
}

namespace {

bool keep_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'' || c == '-';
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Tokens preprocess_tokens(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) break;
    std::string raw(text.substr(start, i - start));
    if (all_digits(raw)) continue;
    std::string token;
    token.reserve(raw.size());
    for (unsigned char c : raw) {
      if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
      if (keep_char(c)) token.push_back(static_cast<char>(c));
    }
    if (token.empty() || all_digits(token)) continue;
    out.push_back(std::move(token));
  }
  return out;
}

FilterDecision filter_article(const OutlineExample& example) {
  const std::size_t n = example.num_sections();
  return (n == 0 || n > kMaxFirstLevelHeadings) ? FilterDecision::kDrop : FilterDecision::kKeep;
}

ParseResult parse_article(const RawArticle& raw) {
  OutlineExample ex;
  ex.id = raw.id;
  ex.category = raw.category;

  bool in_section = false;
  bool empty_heading = false;
  std::size_t section_paragraphs = 0;
  Tokens pending_heading;

  auto close_section = [&] {
    if (in_section && section_paragraphs > 0) {
      ex.labels.back() = 1;
      ex.headings.push_back(pending_heading);
      if (pending_heading.empty()) empty_heading = true;
    }
  };

  for (const auto& block : raw.blocks) {
    if (block.kind == Block::Kind::kHeading) {
      if (block.level != 1) continue;
      close_section();
      in_section = true;
      section_paragraphs = 0;
      pending_heading = preprocess_tokens(block.text);
      continue;
    }
    if (!in_section) continue;
    Tokens tokens = preprocess_tokens(block.text);
    if (tokens.empty()) continue;
    ex.paragraphs.push_back(std::move(tokens));
    ex.labels.push_back(0);
    ++section_paragraphs;
  }
  close_section();

  if (ex.headings.empty()) return Rejection::kNoHeadings;
  if (filter_article(ex) == FilterDecision::kDrop) return Rejection::kTooManyHeadings;
  if (empty_heading) return Rejection::kEmptyHeading;
  return ex;
}

// ---------------------------------------------------------------------------

void TokenCounter::add(const Tokens& tokens) {
  for (const auto& t : tokens) ++counts_[t];
}

void TokenCounter::merge(const TokenCounter& other) {
  for (const auto& [token, n] : other.counts_) counts_[token] += n;
}

Vocabulary::Vocabulary() {
  push("<unk>");
  push("<bos>");
  push("<eos>");
  push("<pad>");
}

void Vocabulary::push(std::string token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_counts(const TokenCounter& counter, std::size_t size) {
  if (size < 1) throw std::invalid_argument("vocabulary size must be >= 1");
  std::vector<std::pair<std::string, std::size_t>> items(counter.counts().begin(),
                                                         counter.counts().end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  for (const auto& [token, n] : items) {
    if (vocab.size() - kNumSpecials >= size) break;
    if (vocab.index_.count(token)) continue;
    vocab.push(token);
  }
  return vocab;
}

int Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<int> Vocabulary::encode(const Tokens& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(index(t));
  return ids;
}

Tokens Vocabulary::decode(std::span<const int> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(token(id));
  return out;
}

void Vocabulary::save(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (n < static_cast<std::size_t>(kNumSpecials)) {
      if (line != vocab.tokens_[n]) throw CorpusError("vocabulary file lacks special token " + vocab.tokens_[n]);
    } else {
      if (line.empty() || vocab.index_.count(line)) throw CorpusError("bad vocabulary entry '" + line + "'");
      vocab.push(line);
    }
    ++n;
  }
  if (n < static_cast<std::size_t>(kNumSpecials)) throw CorpusError("truncated vocabulary file");
  return vocab;
}

Vocabulary build_vocab(std::span<const OutlineExample> corpus, VocabSide side, std::size_t size) {
  TokenCounter counter;
  for (const auto& ex : corpus) {
    const auto& seqs = side == VocabSide::kDocument ? ex.paragraphs : ex.headings;
    for (const auto& s : seqs) counter.add(s);
  }
  return Vocabulary::from_counts(counter, size);
}

// ---------------------------------------------------------------------------

CorpusSplit split_corpus(std::vector<OutlineExample> examples, std::uint64_t seed) {
  if (examples.size() < kMinSplitExamples) {
    throw CorpusError("need at least " + std::to_string(kMinSplitExamples) +
                      " examples to split, got " + std::to_string(examples.size()));
  }
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n_dev = examples.size() / 10;
  const std::size_t n_test = examples.size() / 10;
  const std::size_t n_train = examples.size() - n_dev - n_test;
  CorpusSplit split;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& ex = examples[order[k]];
    if (k < n_train) split.train.push_back(std::move(ex));
    else if (k < n_train + n_dev) split.dev.push_back(std::move(ex));
    else split.test.push_back(std::move(ex));
  }
  return split;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Returns the heading level, 0 for lines that are not headings, or -1 for a
// wikitext page title ("= t =") which is skipped.
int heading_level(const std::string& line, HeadingStyle style, std::string* text) {
  if (style == HeadingStyle::kMarkdown) {
    std::size_t n = 0;
    while (n < line.size() && line[n] == '#') ++n;
    if (n == 0 || n >= line.size() || line[n] != ' ') return 0;
    *text = trim(std::string_view(line).substr(n));
    return static_cast<int>(n);
  }
  std::size_t lead = 0;
  while (lead < line.size() && line[lead] == '=') ++lead;
  std::size_t trail = 0;
  while (trail < line.size() - lead && line[line.size() - 1 - trail] == '=') ++trail;
  if (lead == 0 || lead != trail || 2 * lead >= line.size()) return 0;
  *text = trim(std::string_view(line).substr(lead, line.size() - 2 * lead));
  return lead == 1 ? -1 : static_cast<int>(lead) - 1;
}

void parse_header(const std::string& line, RawArticle& article) {
  std::istringstream fields(line.substr(std::string("@article").size()));
  std::string field;
  while (fields >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    auto key = field.substr(0, eq);
    auto value = field.substr(eq + 1);
    if (key == "id") article.id = value;
    else if (key == "category") article.category = value;
  }
}

}  // namespace

std::vector<RawArticle> read_articles(std::istream& in, const std::string& default_id,
                                      const std::string& default_category, HeadingStyle style) {
  std::vector<RawArticle> articles;
  RawArticle current{default_id, default_category, {}};
  std::string paragraph;
  bool started = false;
  std::size_t header_count = 0;

  auto flush_paragraph = [&] {
    if (!paragraph.empty()) current.blocks.push_back(Block::paragraph(std::move(paragraph)));
    paragraph.clear();
  };
  auto flush_article = [&] {
    flush_paragraph();
    if (started || !current.blocks.empty()) articles.push_back(std::move(current));
  };

  std::string raw_line;
  while (std::getline(in, raw_line)) {
    std::string line = trim(raw_line);
    if (line.rfind("@article", 0) == 0) {
      flush_article();
      ++header_count;
      current = RawArticle{default_id + "#" + std::to_string(header_count), default_category, {}};
      parse_header(line, current);
      started = true;
      continue;
    }
    if (line.empty()) {
      flush_paragraph();
      continue;
    }
    std::string text;
    int level = heading_level(line, style, &text);
    if (level != 0) {
      flush_paragraph();
      if (level > 0) current.blocks.push_back(Block::heading(level, text));
      continue;
    }
    if (!paragraph.empty()) paragraph.push_back(' ');
    paragraph += line;
  }
  flush_article();
  return articles;
}

std::vector<RawArticle> read_article_dir(const std::filesystem::path& dir,
                                         const std::string& default_category, HeadingStyle style) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw CorpusError("input directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RawArticle> all;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw CorpusError("cannot read " + f.string());
    auto articles = read_articles(in, f.stem().string(), default_category, style);
    for (auto& a : articles) all.push_back(std::move(a));
  }
  return all;
}

// ---------------------------------------------------------------------------

nlohmann::json example_to_json(const OutlineExample& ex) {
  return nlohmann::json{{"id", ex.id},
                        {"category", ex.category},
                        {"paragraphs", ex.paragraphs},
                        {"labels", ex.labels},
                        {"headings", ex.headings}};
}

OutlineExample example_from_json(const nlohmann::json& j) {
  OutlineExample ex;
  try {
    ex.id = j.at("id").get<std::string>();
    ex.category = j.value("category", std::string("mixture"));
    ex.paragraphs = j.at("paragraphs").get<std::vector<Tokens>>();
    ex.labels = j.at("labels").get<std::vector<int>>();
    ex.headings = j.at("headings").get<std::vector<Tokens>>();
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("malformed example record: ") + e.what());
  }
  ex.validate();
  return ex;
}

void write_jsonl(std::ostream& out, std::span<const OutlineExample> examples) {
  for (const auto& ex : examples) out << example_to_json(ex).dump() << '\n';
}

std::vector<OutlineExample> read_jsonl(std::istream& in) {
  std::vector<OutlineExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (j.contains("provenance")) continue;
    out.push_back(example_from_json(j));
  }
  return out;
}

std::vector<OutlineExample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read " + path.string());
  return read_jsonl(in);
}

void write_jsonl(const std::filesystem::path& path, std::span<const OutlineExample> examples) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write " + path.string());
  write_jsonl(out, examples);
}

CorpusStats compute_stats(std::span<const OutlineExample> examples) {
  CorpusStats s;
  s.articles = examples.size();
  if (examples.empty()) return s;
  std::set<std::string> doc_words, head_words;
  std::size_t sections = 0, paragraphs = 0, heading_words = 0;
  for (const auto& ex : examples) {
    sections += ex.num_sections();
    paragraphs += ex.num_paragraphs();
    for (const auto& p : ex.paragraphs) doc_words.insert(p.begin(), p.end());
    for (const auto& h : ex.headings) {
      heading_words += h.size();
      head_words.insert(h.begin(), h.end());
    }
  }
  s.doc_vocab = doc_words.size();
  s.outline_vocab = head_words.size();
  s.article_avg_sections = static_cast<double>(sections) / s.articles;
  s.article_avg_paragraphs = static_cast<double>(paragraphs) / s.articles;
  s.section_avg_paragraphs = sections ? static_cast<double>(paragraphs) / sections : 0.0;
  s.heading_avg_words = sections ? static_cast<double>(heading_words) / sections : 0.0;
  return s;
}

nlohmann::json stats_to_json(const CorpusStats& s) {
  return nlohmann::json{{"articles", s.articles},
                        {"article_vocabulary", s.doc_vocab},
                        {"outline_vocabulary", s.outline_vocab},
                        {"article_avg_sections", s.article_avg_sections},
                        {"article_avg_paragraphs", s.article_avg_paragraphs},
                        {"section_avg_paragraphs", s.section_avg_paragraphs},
                        {"heading_avg_words", s.heading_avg_words}};
}

}  // namespace og
