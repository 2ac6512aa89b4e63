#include "og/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "og/decoder.hpp"

namespace og {

WordGraph WordGraph::build(const Tokens& tokens, std::size_t window) {
  if (window < 2) throw std::invalid_argument("co-occurrence window must be at least 2");
  WordGraph g;
  g.nodes = tokens;
  std::sort(g.nodes.begin(), g.nodes.end());
  g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
  g.edges.resize(g.nodes.size());
  auto id = [&](const std::string& w) {
    return static_cast<std::size_t>(std::lower_bound(g.nodes.begin(), g.nodes.end(), w) - g.nodes.begin());
  };
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& w : tokens) ids.push_back(id(w));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size() && j - i < window; ++j) {
      if (ids[i] == ids[j]) continue;
      g.edges[ids[i]][ids[j]] += 1;
      g.edges[ids[j]][ids[i]] += 1;
    }
  }
  return g;
}

TextRankResult textrank_scores(const WordGraph& graph, const TextRankConfig& config) {
  const std::size_t n = graph.size();
  TextRankResult r;
  r.scores.assign(n, Real(1));
  std::vector<Real> out_weight(n, 0);
  for (std::size_t j = 0; j < n; ++j)
    for (const auto& [k, w] : graph.edges[j]) out_weight[j] += w;

  std::vector<Real> next(n);
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      Real s = 0;
      for (const auto& [j, w] : graph.edges[i]) s += w / out_weight[j] * r.scores[j];
      next[i] = (1 - config.damping) + config.damping * s;
    }
    Real delta = 0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::fabs(next[i] - r.scores[i]));
    r.scores.swap(next);
    r.deltas.push_back(delta);
    r.iterations = it + 1;
    if (delta < config.tolerance) break;
  }
  return r;
}

Tokens textrank_heading(const Tokens& section_tokens, const TextRankConfig& config) {
  if (section_tokens.empty()) throw std::invalid_argument("empty section");
  if (section_tokens.size() < config.window) {
    std::map<std::string, std::size_t> counts;
    for (const auto& w : section_tokens) ++counts[w];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it;
    return {best->first};
  }
  WordGraph g = WordGraph::build(section_tokens, config.window);
  TextRankResult r = textrank_scores(g, config);
  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Nodes are already lexicographic, so a stable sort settles ties.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
  Tokens out;
  for (std::size_t i = 0; i < std::min(config.top_k, order.size()); ++i) out.push_back(g.nodes[order[i]]);
  return out;
}

StepwiseOutline ig_pipeline(const std::vector<Tokens>& paragraphs, std::span<const int> boundary_labels,
                            const SectionHeadingFn& heading_method) {
  if (paragraphs.empty()) throw std::invalid_argument("empty document");
  if (boundary_labels.size() != paragraphs.size())
    throw std::invalid_argument("label count does not match paragraphs");
  StepwiseOutline out;
  out.labels.assign(boundary_labels.begin(), boundary_labels.end());
  out.headings = heading_method(paragraphs, out.labels);
  if (out.headings.size() != sections_from_labels(out.labels).size())
    throw std::logic_error("heading method returned the wrong number of headings");
  return out;
}

StepwiseOutline merge_heading_runs(const std::vector<Tokens>& paragraph_headings) {
  if (paragraph_headings.empty()) throw std::invalid_argument("empty document");
  StepwiseOutline out;
  const std::size_t m = paragraph_headings.size();
  out.labels.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (i + 1 == m || paragraph_headings[i + 1] != paragraph_headings[i]) {
      out.labels[i] = 1;
      out.headings.push_back(paragraph_headings[i]);
    }
  }
  return out;
}

StepwiseOutline ga_pipeline(const std::vector<Tokens>& paragraphs, const SectionHeadingFn& heading_method) {
  if (paragraphs.empty()) throw std::invalid_argument("empty document");
  const std::vector<int> singletons(paragraphs.size(), 1);
  auto headings = heading_method(paragraphs, singletons);
  if (headings.size() != paragraphs.size())
    throw std::logic_error("heading method returned the wrong number of headings");
  return merge_heading_runs(headings);
}

SectionHeadingFn textrank_method(const TextRankConfig& config) {
  return [config](const std::vector<Tokens>& paragraphs, std::span<const int> labels) {
    std::vector<Tokens> out;
    for (const auto& span : sections_from_labels(labels)) {
      Tokens text;
      for (std::size_t p = span.begin; p < span.end; ++p)
        text.insert(text.end(), paragraphs[p].begin(), paragraphs[p].end());
      out.push_back(text.empty() ? Tokens{} : textrank_heading(text, config));
    }
    return out;
  };
}

SectionHeadingFn neural_method(const OutlineModel& model, const Vocabulary& doc_vocab,
                               const Vocabulary& head_vocab) {
  return [&model, &doc_vocab, &head_vocab](const std::vector<Tokens>& paragraphs, std::span<const int> labels) {
    std::vector<std::vector<int>> ids;
    for (const auto& p : paragraphs) ids.push_back(doc_vocab.encode(p));
    std::vector<Tokens> out;
    for (const auto& h : model.generate_headings(ids, labels)) out.push_back(head_vocab.decode(h));
    return out;
  };
}

}  // namespace og
