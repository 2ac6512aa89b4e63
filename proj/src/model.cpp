#include "og/model.hpp"

#include <stdexcept>

namespace og {

EncodedExample encode_example(const OutlineExample& example, const Vocabulary& doc_vocab,
                              const Vocabulary& head_vocab) {
  EncodedExample out;
  out.paragraphs.reserve(example.paragraphs.size());
  for (const auto& p : example.paragraphs) out.paragraphs.push_back(doc_vocab.encode(p));
  out.labels = example.labels;
  for (const auto& h : example.headings) out.headings.push_back(head_vocab.encode(h));
  return out;
}

OutlineModel::OutlineModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng root(seed);
  Rng enc_rng = root.split(1), bnd_rng = root.split(2), dec_rng = root.split(3);
  encoder = Encoder(params, config_, enc_rng);
  boundary = BoundaryModel(params, config_, bnd_rng);
  decoder = Decoder(params, config_, dec_rng);
}

Var OutlineModel::loss(Tape& t, const EncodedExample& example, Real boundary_weight,
                       LossParts* parts) const {
  EncodedDocument doc = encoder.encode(t, example.paragraphs);
  auto sections = sections_from_labels(example.labels);
  std::size_t tokens = 0;
  Var head = decoder.heading_nll(t, doc.paragraph_states, sections, example.headings, &tokens);
  Var bnd = boundary.loss(t, doc.paragraph_states, example.labels);
  if (parts) {
    parts->heading_nll = t.scalar(head);
    parts->boundary_nll = t.scalar(bnd);
    parts->heading_tokens = tokens;
  }
  return add(t, head, scale(t, bnd, boundary_weight));
}

BoundarySequence OutlineModel::predict_boundaries(const std::vector<std::vector<int>>& paragraphs) const {
  if (paragraphs.empty()) throw std::invalid_argument("empty document");
  Tape t(&params);
  EncodedDocument doc = encoder.encode(t, paragraphs);
  return boundary.predict(t, doc.paragraph_states, config_.threshold);
}

OutlineModel::Outline OutlineModel::generate(const std::vector<std::vector<int>>& paragraphs,
                                             DecodeTrace* trace) const {
  if (paragraphs.empty()) throw std::invalid_argument("empty document");
  Tape t(&params);
  EncodedDocument doc = encoder.encode(t, paragraphs);
  Outline out;
  out.boundaries = boundary.predict(t, doc.paragraph_states, config_.threshold);
  auto sections = sections_from_labels(out.boundaries.labels);
  out.headings = decoder.greedy_decode(t, doc.paragraph_states, sections, trace);
  return out;
}

std::vector<std::vector<int>> OutlineModel::generate_headings(const std::vector<std::vector<int>>& paragraphs,
                                                              std::span<const int> labels,
                                                              DecodeTrace* trace) const {
  if (paragraphs.empty()) throw std::invalid_argument("empty document");
  if (labels.size() != paragraphs.size()) throw std::invalid_argument("label count does not match paragraphs");
  Tape t(&params);
  EncodedDocument doc = encoder.encode(t, paragraphs);
  auto sections = sections_from_labels(labels);
  return decoder.greedy_decode(t, doc.paragraph_states, sections, trace);
}

}  // namespace og
