// EM_sec, EM_outline and Rouge_head, corpus reports and paired t-tests.

#ifndef OG_METRICS_HPP
#define OG_METRICS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "og/corpus.hpp"
#include "og/tensor.hpp"

namespace og {

// A predicted (or gold) outline of one document.
struct OutlineRecord {
  std::string id;
  std::vector<int> labels;
  std::vector<Tokens> headings;
};

OutlineRecord gold_record(const OutlineExample& example);

// Throws std::invalid_argument on length mismatch.
bool em_sec(std::span<const int> predicted, std::span<const int> gold);
bool em_outline(const OutlineRecord& predicted, const OutlineRecord& gold);

// Clipped unigram recall |hyp ∩ ref| / |ref|.
Real rouge1_recall(const Tokens& hypothesis, const Tokens& reference);

// Rouge-1 recall of each predicted section whose paragraph span also occurs
// in the gold segmentation, in predicted order.
std::vector<Real> matched_section_rouge(const OutlineRecord& predicted, const OutlineRecord& gold);

struct DocumentScore {
  std::string id;
  bool em_sec = false;
  bool em_outline = false;
  std::vector<Real> section_rouge;
  std::optional<Real> rouge;  // mean of section_rouge; empty when none matched
};

struct EvalReport {
  std::size_t documents = 0;
  Real em_outline = 0;
  Real em_sec = 0;
  Real rouge_head = 0;
  std::size_t rouge_documents = 0;  // documents with at least one matched section
  std::size_t correct_sections = 0;
  std::vector<DocumentScore> per_document;
};

// Predictions and gold are aligned by position; ids must agree.
EvalReport evaluate(std::span<const OutlineRecord> predicted, std::span<const OutlineRecord> gold);
nlohmann::json report_to_json(const EvalReport& report, bool include_documents = true);

struct TTest {
  std::size_t pairs = 0;
  Real mean_difference = 0;
  Real t = 0;
  Real p_value = 1;
  bool variance_zero = false;
};

// Two-tailed paired t-test. Zero-variance differences give p = 1 when the
// mean difference is 0 and p = 0 otherwise, flagged variance_zero.
TTest paired_significance(std::span<const Real> a, std::span<const Real> b);
nlohmann::json ttest_to_json(const TTest& t);

// Per-document metric vectors of two reports over the same documents; the
// rouge vectors keep documents scored by both.
struct PairedScores {
  std::vector<Real> a, b;
};
PairedScores paired_scores(const EvalReport& a, const EvalReport& b, const std::string& metric);

// Rows of (name, report) as a plain-text model x metric table, in percent.
std::string metrics_table(std::span<const std::pair<std::string, EvalReport>> rows);

}  // namespace og

#endif  // OG_METRICS_HPP
