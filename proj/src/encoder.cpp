#include "og/encoder.hpp"

#include <array>
#include <stdexcept>

namespace og {

std::string_view to_string(BoundaryVariant v) {
  switch (v) {
    case BoundaryVariant::kMpd: return "mpd";
    case BoundaryVariant::kMpdMinusP: return "mpd_minus_p";
    case BoundaryVariant::kGpd: return "gpd";
    case BoundaryVariant::kCrf: return "crf";
  }
  return "?";
}

std::string_view to_string(HeadingDependency d) {
  switch (d) {
    case HeadingDependency::kMarkov: return "markov";
    case HeadingDependency::kGlobal: return "global";
    case HeadingDependency::kNone: return "none";
  }
  return "?";
}

BoundaryVariant parse_boundary_variant(std::string_view s) {
  if (s == "mpd") return BoundaryVariant::kMpd;
  if (s == "mpd_minus_p") return BoundaryVariant::kMpdMinusP;
  if (s == "gpd") return BoundaryVariant::kGpd;
  if (s == "crf") return BoundaryVariant::kCrf;
  throw std::invalid_argument("unknown boundary variant '" + std::string(s) + "'");
}

HeadingDependency parse_heading_dependency(std::string_view s) {
  if (s == "markov") return HeadingDependency::kMarkov;
  if (s == "global") return HeadingDependency::kGlobal;
  if (s == "none") return HeadingDependency::kNone;
  throw std::invalid_argument("unknown heading dependency '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (doc_vocab <= 4 || head_vocab <= 4) throw std::invalid_argument("vocabularies need at least one non-special token");
  if (!word_emb || !head_emb || !hidden || !dec_hidden || !attn) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (!(init_range > 0)) throw std::invalid_argument("init_range must be positive");
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("threshold must lie in (0,1)");
  if (max_heading_len < 1) throw std::invalid_argument("max_heading_len must be >= 1");
}

GruCell GruCell::create(ParamSet& params, const std::string& prefix, std::size_t input,
                        std::size_t hidden, Rng& rng, Real range) {
  GruCell c;
  c.input = input;
  c.hidden = hidden;
  c.wz = params.add(prefix + ".Wz", {hidden, input}, rng, range);
  c.uz = params.add(prefix + ".Uz", {hidden, hidden}, rng, range);
  c.bz = params.add(prefix + ".bz", {hidden}, rng, range);
  c.wr = params.add(prefix + ".Wr", {hidden, input}, rng, range);
  c.ur = params.add(prefix + ".Ur", {hidden, hidden}, rng, range);
  c.br = params.add(prefix + ".br", {hidden}, rng, range);
  c.wh = params.add(prefix + ".Wh", {hidden, input}, rng, range);
  c.uh = params.add(prefix + ".Uh", {hidden, hidden}, rng, range);
  c.bh = params.add(prefix + ".bh", {hidden}, rng, range);
  return c;
}

Var gru_step(Tape& t, const GruCell& cell, Var x, Var h_prev) {
  if (t.value(x).size() != cell.input || t.value(h_prev).size() != cell.hidden) {
    throw DimensionError("gru_step: input " + shape_string(t.value(x).shape()) + " / state " +
                         shape_string(t.value(h_prev).shape()) + " vs cell " +
                         std::to_string(cell.input) + "->" + std::to_string(cell.hidden));
  }
  auto affine = [&](std::size_t w, std::size_t u, std::size_t b, Var h) {
    std::array<Var, 3> terms{matvec(t, t.param(w), x), matvec(t, t.param(u), h), t.param(b)};
    return add_n(t, terms);
  };
  Var z = sigmoid(t, affine(cell.wz, cell.uz, cell.bz, h_prev));
  Var r = sigmoid(t, affine(cell.wr, cell.ur, cell.br, h_prev));
  Var cand = tanh(t, affine(cell.wh, cell.uh, cell.bh, mul(t, r, h_prev)));
  return add(t, h_prev, mul(t, z, sub(t, cand, h_prev)));
}

BiRnnOutput run_bidirectional(Tape& t, const GruCell& fwd, const GruCell& bwd,
                              std::span<const Var> inputs) {
  BiRnnOutput out;
  const std::size_t n = inputs.size();
  out.forward.resize(n);
  out.backward.resize(n);
  Var h = t.zeros({fwd.hidden});
  for (std::size_t i = 0; i < n; ++i) {
    h = gru_step(t, fwd, inputs[i], h);
    out.forward[i] = h;
  }
  h = t.zeros({bwd.hidden});
  for (std::size_t i = n; i-- > 0;) {
    h = gru_step(t, bwd, inputs[i], h);
    out.backward[i] = h;
  }
  return out;
}

Encoder::Encoder(ParamSet& params, const ModelConfig& config, Rng& rng) {
  const Real range = config.init_range;
  embedding = params.add("encoder.embedding", {config.doc_vocab, config.word_emb}, rng, range);
  word_fwd = GruCell::create(params, "encoder.word_fwd", config.word_emb, config.hidden, rng, range);
  word_bwd = GruCell::create(params, "encoder.word_bwd", config.word_emb, config.hidden, rng, range);
  para_fwd = GruCell::create(params, "encoder.para_fwd", config.state_dim(), config.hidden, rng, range);
  para_bwd = GruCell::create(params, "encoder.para_bwd", config.state_dim(), config.hidden, rng, range);
}

std::pair<std::vector<Var>, Var> Encoder::encode_paragraph(Tape& t, std::span<const int> tokens) const {
  if (tokens.empty()) throw std::invalid_argument("encode_paragraph: empty paragraph");
  std::vector<Var> inputs;
  inputs.reserve(tokens.size());
  for (int id : tokens) inputs.push_back(lookup(t, embedding, static_cast<std::size_t>(id)));
  BiRnnOutput rnn = run_bidirectional(t, word_fwd, word_bwd, inputs);
  std::vector<Var> states;
  states.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::array<Var, 2> parts{rnn.forward[i], rnn.backward[i]};
    states.push_back(concat(t, parts));
  }
  std::array<Var, 2> last{rnn.forward.back(), rnn.backward.front()};
  return {std::move(states), concat(t, last)};
}

std::vector<Var> Encoder::encode_document(Tape& t, std::span<const Var> paragraph_embeddings) const {
  if (paragraph_embeddings.empty()) throw std::invalid_argument("encode_document: no paragraphs");
  BiRnnOutput rnn = run_bidirectional(t, para_fwd, para_bwd, paragraph_embeddings);
  std::vector<Var> states;
  states.reserve(paragraph_embeddings.size());
  for (std::size_t m = 0; m < paragraph_embeddings.size(); ++m) {
    std::array<Var, 2> parts{rnn.forward[m], rnn.backward[m]};
    states.push_back(concat(t, parts));
  }
  return states;
}

EncodedDocument Encoder::encode(Tape& t, const std::vector<std::vector<int>>& paragraphs) const {
  EncodedDocument doc;
  doc.word_states.reserve(paragraphs.size());
  doc.paragraph_embeddings.reserve(paragraphs.size());
  for (const auto& p : paragraphs) {
    auto [states, embedding_var] = encode_paragraph(t, p);
    doc.word_states.push_back(std::move(states));
    doc.paragraph_embeddings.push_back(embedding_var);
  }
  doc.paragraph_states = encode_document(t, doc.paragraph_embeddings);
  return doc;
}

}  // namespace og
