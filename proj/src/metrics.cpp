#include "og/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "og/decoder.hpp"

namespace og {

OutlineRecord gold_record(const OutlineExample& example) {
  return {example.id, example.labels, example.headings};
}

bool em_sec(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("label length mismatch: " + std::to_string(predicted.size()) + " vs " +
                                std::to_string(gold.size()));
  return std::equal(predicted.begin(), predicted.end(), gold.begin());
}

bool em_outline(const OutlineRecord& predicted, const OutlineRecord& gold) {
  return em_sec(predicted.labels, gold.labels) && predicted.headings == gold.headings;
}

Real rouge1_recall(const Tokens& hypothesis, const Tokens& reference) {
  if (reference.empty()) throw std::invalid_argument("empty reference heading");
  std::map<std::string, std::size_t> hyp;
  for (const auto& w : hypothesis) ++hyp[w];
  std::map<std::string, std::size_t> ref;
  for (const auto& w : reference) ++ref[w];
  std::size_t overlap = 0;
  for (const auto& [w, n] : ref) {
    auto it = hyp.find(w);
    if (it != hyp.end()) overlap += std::min(n, it->second);
  }
  return static_cast<Real>(overlap) / static_cast<Real>(reference.size());
}

std::vector<Real> matched_section_rouge(const OutlineRecord& predicted, const OutlineRecord& gold) {
  auto pred_spans = sections_from_labels(predicted.labels);
  auto gold_spans = sections_from_labels(gold.labels);
  if (pred_spans.size() != predicted.headings.size() || gold_spans.size() != gold.headings.size())
    throw std::invalid_argument("heading count does not match boundary labels in document " + gold.id);
  std::vector<Real> out;
  for (std::size_t i = 0; i < pred_spans.size(); ++i) {
    for (std::size_t j = 0; j < gold_spans.size(); ++j) {
      if (pred_spans[i] == gold_spans[j]) {
        out.push_back(rouge1_recall(predicted.headings[i], gold.headings[j]));
        break;
      }
    }
  }
  return out;
}

EvalReport evaluate(std::span<const OutlineRecord> predicted, std::span<const OutlineRecord> gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("prediction count " + std::to_string(predicted.size()) + " does not match gold " +
                                std::to_string(gold.size()));
  if (gold.empty()) throw std::invalid_argument("nothing to evaluate");
  EvalReport r;
  r.documents = gold.size();
  std::size_t sec = 0, outline = 0;
  Real rouge_sum = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].id != gold[i].id)
      throw std::invalid_argument("document order differs: " + predicted[i].id + " vs " + gold[i].id);
    DocumentScore d;
    d.id = gold[i].id;
    d.em_sec = em_sec(predicted[i].labels, gold[i].labels);
    d.em_outline = d.em_sec && predicted[i].headings == gold[i].headings;
    d.section_rouge = matched_section_rouge(predicted[i], gold[i]);
    if (!d.section_rouge.empty()) {
      Real s = 0;
      for (Real v : d.section_rouge) s += v;
      d.rouge = s / static_cast<Real>(d.section_rouge.size());
      rouge_sum += *d.rouge;
      ++r.rouge_documents;
    }
    r.correct_sections += d.section_rouge.size();
    sec += d.em_sec;
    outline += d.em_outline;
    r.per_document.push_back(std::move(d));
  }
  const Real n = static_cast<Real>(r.documents);
  r.em_sec = static_cast<Real>(sec) / n;
  r.em_outline = static_cast<Real>(outline) / n;
  r.rouge_head = r.rouge_documents ? rouge_sum / static_cast<Real>(r.rouge_documents) : Real(0);
  if (r.em_outline > r.em_sec) throw std::logic_error("em_outline exceeds em_sec");
  return r;
}

nlohmann::json report_to_json(const EvalReport& r, bool include_documents) {
  nlohmann::json j = {{"documents", r.documents},
                      {"em_outline", r.em_outline},
                      {"em_sec", r.em_sec},
                      {"rouge_head", r.rouge_head},
                      {"rouge_documents", r.rouge_documents},
                      {"documents_without_correct_section", r.documents - r.rouge_documents},
                      {"correct_sections", r.correct_sections}};
  if (include_documents) {
    auto docs = nlohmann::json::array();
    for (const auto& d : r.per_document) {
      nlohmann::json e = {{"id", d.id}, {"em_sec", d.em_sec}, {"em_outline", d.em_outline},
                          {"section_rouge", d.section_rouge}};
      e["rouge"] = d.rouge ? nlohmann::json(*d.rouge) : nlohmann::json(nullptr);
      docs.push_back(std::move(e));
    }
    j["per_document"] = std::move(docs);
  }
  return j;
}

TTest paired_significance(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired scores differ in length");
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least 2 pairs");
  TTest out;
  out.pairs = a.size();
  const Real n = static_cast<Real>(a.size());
  Real mean = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  Real ss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real d = a[i] - b[i] - mean;
    ss += d * d;
  }
  out.mean_difference = mean;
  const Real sd = std::sqrt(ss / (n - 1));
  if (sd == 0) {
    out.variance_zero = true;
    out.t = 0;
    out.p_value = mean == 0 ? Real(1) : Real(0);
    return out;
  }
  out.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(static_cast<double>(n - 1));
  out.p_value = static_cast<Real>(2 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t))));
  return out;
}

nlohmann::json ttest_to_json(const TTest& t) {
  nlohmann::json j = {{"pairs", t.pairs}, {"mean_difference", t.mean_difference}, {"t", t.t}, {"p_value", t.p_value}};
  if (t.variance_zero) j["note"] = "variance zero";
  return j;
}

PairedScores paired_scores(const EvalReport& a, const EvalReport& b, const std::string& metric) {
  if (a.per_document.size() != b.per_document.size())
    throw std::invalid_argument("reports cover different documents");
  PairedScores out;
  for (std::size_t i = 0; i < a.per_document.size(); ++i) {
    const auto& x = a.per_document[i];
    const auto& y = b.per_document[i];
    if (x.id != y.id) throw std::invalid_argument("reports differ at document " + x.id);
    if (metric == "em_sec") {
      out.a.push_back(x.em_sec);
      out.b.push_back(y.em_sec);
    } else if (metric == "em_outline") {
      out.a.push_back(x.em_outline);
      out.b.push_back(y.em_outline);
    } else if (metric == "rouge_head") {
      if (x.rouge && y.rouge) {
        out.a.push_back(*x.rouge);
        out.b.push_back(*y.rouge);
      }
    } else {
      throw std::invalid_argument("unknown metric " + metric);
    }
  }
  return out;
}

std::string metrics_table(std::span<const std::pair<std::string, EvalReport>> rows) {
  std::size_t width = 5;
  for (const auto& [name, r] : rows) width = std::max(width, name.size());
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s  %10s  %10s  %10s\n", static_cast<int>(width), "Model", "EM_outline",
                "EM_sec", "Rouge_head");
  out << buf;
  out << std::string(width + 36, '-') << '\n';
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %10.2f  %10.2f  %10.2f\n", static_cast<int>(width), name.c_str(),
                  100 * static_cast<double>(r.em_outline), 100 * static_cast<double>(r.em_sec),
                  100 * static_cast<double>(r.rouge_head));
    out << buf;
  }
  return out.str();
}

}  // namespace og
