// Step-wise comparison systems: TextRank headings, identify-then-generate
// (IG) and generate-then-aggregate (GA) pipelines.

#ifndef OG_BASELINES_HPP
#define OG_BASELINES_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "og/corpus.hpp"
#include "og/model.hpp"
#include "og/tensor.hpp"

namespace og {

struct TextRankConfig {
  std::size_t window = 2;
  Real damping = Real(0.85);
  std::size_t max_iterations = 100;
  Real tolerance = Real(1e-6);
  std::size_t top_k = 2;
};

// Undirected co-occurrence graph; nodes sorted lexicographically.
struct WordGraph {
  std::vector<std::string> nodes;
  // Symmetric adjacency weights keyed by node index.
  std::vector<std::map<std::size_t, Real>> edges;

  static WordGraph build(const Tokens& tokens, std::size_t window);
  std::size_t size() const { return nodes.size(); }
};

struct TextRankResult {
  std::vector<Real> scores;  // aligned with WordGraph::nodes
  std::size_t iterations = 0;
  std::vector<Real> deltas;  // max |change| per iteration
};

// S(i) = (1 - d) + d * sum_j w_ji / (sum_k w_jk) * S(j), starting from 1.
TextRankResult textrank_scores(const WordGraph& graph, const TextRankConfig& config);

// Top-k tokens of a section by TextRank score (ties lexicographic), in score
// order. Sections shorter than the window fall back to the most frequent
// token.
Tokens textrank_heading(const Tokens& section_tokens, const TextRankConfig& config);

struct StepwiseOutline {
  std::vector<int> labels;
  std::vector<Tokens> headings;
};

// Section i's heading from its paragraphs [begin, end).
using SectionHeadingFn = std::function<std::vector<Tokens>(const std::vector<Tokens>& paragraphs,
                                                           std::span<const int> labels)>;

// Step 1 labels are passed through untouched; step 2 runs per section.
StepwiseOutline ig_pipeline(const std::vector<Tokens>& paragraphs, std::span<const int> boundary_labels,
                            const SectionHeadingFn& heading_method);

// Headings for every paragraph, then maximal runs of identical headings are
// merged into sections.
StepwiseOutline ga_pipeline(const std::vector<Tokens>& paragraphs, const SectionHeadingFn& heading_method);
StepwiseOutline merge_heading_runs(const std::vector<Tokens>& paragraph_headings);

// A SectionHeadingFn that runs TextRank over each section's concatenated
// paragraphs.
SectionHeadingFn textrank_method(const TextRankConfig& config);
// Greedy neural headings for the given segmentation. The model must outlive
// the returned function.
SectionHeadingFn neural_method(const OutlineModel& model, const Vocabulary& doc_vocab,
                               const Vocabulary& head_vocab);

}  // namespace og

#endif  // OG_BASELINES_HPP
