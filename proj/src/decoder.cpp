#include "og/decoder.hpp"

#include <array>
#include <stdexcept>

#include "og/corpus.hpp"

namespace og {

std::vector<SectionSpan> sections_from_labels(std::span<const int> labels) {
  if (labels.empty() || labels.back() != 1) {
    throw std::invalid_argument("labels must end with a section boundary");
  }
  std::vector<SectionSpan> out;
  std::size_t begin = 0;
  for (std::size_t m = 0; m < labels.size(); ++m) {
    if (labels[m] == 1) {
      out.push_back({begin, m + 1});
      begin = m + 1;
    }
  }
  return out;
}

AttentionCounters& attention_counters() {
  static AttentionCounters counters;
  return counters;
}

Decoder::Decoder(ParamSet& params, const ModelConfig& config, Rng& rng) : config_(config) {
  const Real range = config.init_range;
  const std::size_t d = config.state_dim();
  const std::size_t hd = config.dec_hidden;
  const std::size_t a = config.attn;
  embedding = params.add("decoder.embedding", {config.head_vocab, config.head_emb}, rng, range);
  cell = GruCell::create(params, "decoder.gru", config.head_emb + d + hd, hd, rng, range);
  w3 = params.add("decoder.W3", {hd, hd}, rng, range);
  w4 = params.add("decoder.W4", {hd, d}, rng, range);
  b1 = params.add("decoder.b1", {hd}, rng, range);
  w5 = params.add("decoder.W5", {a, hd}, rng, range);
  w6 = params.add("decoder.W6", {a, hd}, rng, range);
  b2 = params.add("decoder.b2", {a}, rng, range);
  v = params.add("decoder.v", {a}, rng, range);
  if (hd != d) w_att = params.add("decoder.W_att", {d, hd}, rng, range);
  w_out = params.add("decoder.W_o", {hd + d + hd, config.head_vocab}, rng, range);
  b_out = params.add("decoder.b_o", {config.head_vocab}, rng, range);
}

Var Decoder::section_attention(Tape& t, std::span<const Var> section_states, Var h_prev,
                               std::vector<Real>* weights) const {
  if (section_states.empty()) throw std::invalid_argument("section_attention: empty section");
  ++attention_counters().section;
  Var query = w_att ? matvec(t, t.param(*w_att), h_prev) : h_prev;
  std::vector<Var> scores;
  scores.reserve(section_states.size());
  for (Var h : section_states) scores.push_back(dot(t, h, query));
  Var alpha = softmax(t, stack(t, scores));
  if (weights) {
    auto w = t.value(alpha).data();
    weights->assign(w.begin(), w.end());
  }
  return weighted_sum(t, section_states, alpha);
}

Var Decoder::init_state(Tape& t, std::optional<Var> z_prev, Var closing_state) const {
  Var base = add(t, matvec(t, t.param(w4), closing_state), t.param(b1));
  if (!z_prev) return base;
  return add(t, matvec(t, t.param(w3), *z_prev), base);
}

void Decoder::append_review(Tape& t, ReviewSet& review, Var state) const {
  review.states.push_back(state);
  if (!config_.ablate_review) review.keys.push_back(matvec(t, t.param(w5), state));
}

Var Decoder::review_context(Tape& t, const ReviewSet& review, Var h_prev,
                            std::vector<Real>* weights) const {
  if (review.empty()) {
    if (weights) weights->clear();
    return t.zeros({config_.dec_hidden});
  }
  ++attention_counters().review;
  std::vector<Var> keys = review.keys;
  if (keys.size() != review.states.size()) {
    keys.clear();
    for (Var s : review.states) keys.push_back(matvec(t, t.param(w5), s));
  }
  std::array<Var, 2> query_terms{matvec(t, t.param(w6), h_prev), t.param(b2)};
  Var query = add_n(t, query_terms);
  Var vv = t.param(v);
  std::vector<Var> scores;
  scores.reserve(keys.size());
  for (Var k : keys) scores.push_back(dot(t, vv, tanh(t, add(t, k, query))));
  Var beta = softmax(t, stack(t, scores));
  if (weights) {
    auto w = t.value(beta).data();
    weights->assign(w.begin(), w.end());
  }
  return weighted_sum(t, review.states, beta);
}

Decoder::Step Decoder::decode_step(Tape& t, int prev_word, Var h_prev, Var context,
                                   Var review_ctx) const {
  if (prev_word < 0 || static_cast<std::size_t>(prev_word) >= config_.head_vocab) {
    throw std::out_of_range("decode_step: word id " + std::to_string(prev_word) + " outside vocabulary");
  }
  std::array<Var, 3> input{lookup(t, embedding, static_cast<std::size_t>(prev_word)), context, review_ctx};
  Var h = gru_step(t, cell, concat(t, input), h_prev);
  std::array<Var, 3> features{h, context, review_ctx};
  Var logits = add(t, matvec_t(t, t.param(w_out), concat(t, features)), t.param(b_out));
  return {h, logits};
}

Var Decoder::start_heading(Tape& t, const HeadingHistory& history, Var closing_state) const {
  std::optional<Var> z;
  if (!history.means.empty()) {
    switch (config_.effective_dependency()) {
      case HeadingDependency::kMarkov:
        z = history.means.back();
        break;
      case HeadingDependency::kGlobal:
        z = history.means.size() == 1
                ? history.means[0]
                : scale(t, add_n(t, history.means), Real(1) / static_cast<Real>(history.means.size()));
        break;
      case HeadingDependency::kNone:
        break;
    }
  }
  return init_state(t, z, closing_state);
}

Var Decoder::contexts_for(Tape& t, std::span<const Var> section_states, const ReviewSet& review,
                          Var h_prev, Var* review_ctx, std::vector<Real>* alpha,
                          std::vector<Real>* beta) const {
  Var context = config_.ablate_section_attention ? t.zeros({config_.state_dim()})
                                                 : section_attention(t, section_states, h_prev, alpha);
  *review_ctx = config_.ablate_review ? t.zeros({config_.dec_hidden})
                                      : review_context(t, review, h_prev, beta);
  return context;
}

Var Decoder::heading_nll(Tape& t, std::span<const Var> paragraph_states,
                         std::span<const SectionSpan> sections,
                         const std::vector<std::vector<int>>& headings, std::size_t* tokens) const {
  if (sections.size() != headings.size()) {
    throw std::invalid_argument("heading_nll: " + std::to_string(sections.size()) + " sections vs " +
                                std::to_string(headings.size()) + " headings");
  }
  ReviewSet review;
  HeadingHistory history;
  std::vector<Var> losses;
  std::size_t count = 0;
  for (std::size_t n = 0; n < sections.size(); ++n) {
    const auto span = sections[n];
    auto states = paragraph_states.subspan(span.begin, span.size());
    Var h = start_heading(t, history, states.back());

    std::vector<int> inputs{Vocabulary::kBos};
    inputs.insert(inputs.end(), headings[n].begin(), headings[n].end());
    std::vector<int> targets(headings[n].begin(), headings[n].end());
    targets.push_back(Vocabulary::kEos);

    std::vector<Var> outputs;
    for (std::size_t u = 0; u < targets.size(); ++u) {
      Var review_ctx;
      Var context = contexts_for(t, states, review, h, &review_ctx, nullptr, nullptr);
      Step step = decode_step(t, inputs[u], h, context, review_ctx);
      losses.push_back(nll_softmax(t, step.logits, static_cast<std::size_t>(targets[u])));
      h = step.state;
      append_review(t, review, h);
      outputs.push_back(h);
    }
    count += targets.size();
    history.means.push_back(scale(t, add_n(t, outputs), Real(1) / static_cast<Real>(outputs.size())));
  }
  if (tokens) *tokens = count;
  return add_n(t, losses);
}

std::vector<std::vector<int>> Decoder::greedy_decode(Tape& t, std::span<const Var> paragraph_states,
                                                     std::span<const SectionSpan> sections,
                                                     DecodeTrace* trace) const {
  ReviewSet review;
  HeadingHistory history;
  std::vector<std::vector<int>> result;
  for (const auto& span : sections) {
    auto states = paragraph_states.subspan(span.begin, span.size());
    Var h = start_heading(t, history, states.back());
    std::vector<int> heading;
    std::vector<Var> outputs;
    std::vector<std::vector<Real>> alphas, betas;
    bool degenerate = false;
    int prev = Vocabulary::kBos;

    for (std::size_t u = 0; u < config_.max_heading_len; ++u) {
      Var review_ctx;
      std::vector<Real> alpha, beta;
      Var context = contexts_for(t, states, review, h, &review_ctx, &alpha, &beta);
      Step step = decode_step(t, prev, h, context, review_ctx);
      h = step.state;
      append_review(t, review, h);
      outputs.push_back(h);
      if (trace) {
        alphas.push_back(std::move(alpha));
        betas.push_back(std::move(beta));
      }

      const Tensor& logits = t.value(step.logits);
      int best = -1, best_word = -1;
      for (std::size_t w = 0; w < logits.size(); ++w) {
        const int id = static_cast<int>(w);
        if (id == Vocabulary::kBos || id == Vocabulary::kPad) continue;
        if (best < 0 || logits[w] > logits[static_cast<std::size_t>(best)]) best = id;
        if (id != Vocabulary::kEos &&
            (best_word < 0 || logits[w] > logits[static_cast<std::size_t>(best_word)])) {
          best_word = id;
        }
      }
      if (best == Vocabulary::kEos) {
        if (u == 0) {
          degenerate = true;
          heading.push_back(best_word);
        }
        break;
      }
      heading.push_back(best);
      prev = best;
    }
    history.means.push_back(outputs.size() == 1
                                ? outputs[0]
                                : scale(t, add_n(t, outputs), Real(1) / static_cast<Real>(outputs.size())));
    if (trace) {
      trace->section_attention.push_back(std::move(alphas));
      trace->review_attention.push_back(std::move(betas));
      trace->review_set_sizes.push_back(review.size());
      trace->degenerate.push_back(degenerate);
    }
    result.push_back(std::move(heading));
  }
  return result;
}

}  // namespace og
