// Section heading generation: a GRU decoder fed with a section-aware context
// (attention restricted to the section's paragraph states) and a review
// context (attention over every decoder state emitted so far in the
// document), initialized from the previous heading's mean state.

#ifndef OG_DECODER_HPP
#define OG_DECODER_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "og/autodiff.hpp"
#include "og/encoder.hpp"
#include "og/model_config.hpp"

namespace og {

// Half-open paragraph range [begin, end) of one section.
struct SectionSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const SectionSpan&, const SectionSpan&) = default;
};

// Throws std::invalid_argument when the last label is not 1.
std::vector<SectionSpan> sections_from_labels(std::span<const int> labels);

// Decoder states emitted so far in the current document, with their review
// keys W5 h precomputed.
struct ReviewSet {
  std::vector<Var> states;
  std::vector<Var> keys;
  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
};

struct DecodeTrace {
  // [heading][step][k]
  std::vector<std::vector<std::vector<Real>>> section_attention;
  std::vector<std::vector<std::vector<Real>>> review_attention;
  // Review-set size after each heading.
  std::vector<std::size_t> review_set_sizes;
  // Headings whose first argmax was EOS and got replaced.
  std::vector<bool> degenerate;
};

struct AttentionCounters {
  std::atomic<std::uint64_t> section{0};
  std::atomic<std::uint64_t> review{0};
  void reset() {
    section = 0;
    review = 0;
  }
};

// Process-wide call counts of the two attention mechanisms.
AttentionCounters& attention_counters();

class Decoder {
 public:
  Decoder() = default;
  Decoder(ParamSet& params, const ModelConfig& config, Rng& rng);

  // alpha_k ~ exp(h_k . q) with q = h_prev, or q = W_att h_prev when the
  // decoder and paragraph-state sizes differ.
  Var section_attention(Tape& t, std::span<const Var> section_states, Var h_prev,
                        std::vector<Real>* weights = nullptr) const;
  // W3 z_prev + W4 h_closing + b1, or W4 h_closing + b1 without z_prev.
  Var init_state(Tape& t, std::optional<Var> z_prev, Var closing_state) const;
  // beta ~ exp(v . tanh(W5 h_ij + W6 h_prev + b2)); zero vector for an empty set.
  Var review_context(Tape& t, const ReviewSet& review, Var h_prev,
                     std::vector<Real>* weights = nullptr) const;
  void append_review(Tape& t, ReviewSet& review, Var state) const;

  struct Step {
    Var state;
    Var logits;
  };
  // GRU over [emb(prev) || c || c_review], then logits
  // W_o^T [h || c || c_review] + b_o.
  Step decode_step(Tape& t, int prev_word, Var h_prev, Var context, Var review_context) const;

  // Summed -log p of every gold heading token plus EOS, with teacher forcing.
  Var heading_nll(Tape& t, std::span<const Var> paragraph_states,
                  std::span<const SectionSpan> sections,
                  const std::vector<std::vector<int>>& headings, std::size_t* tokens = nullptr) const;

  std::vector<std::vector<int>> greedy_decode(Tape& t, std::span<const Var> paragraph_states,
                                              std::span<const SectionSpan> sections,
                                              DecodeTrace* trace = nullptr) const;

  const ModelConfig& config() const { return config_; }

  std::size_t embedding = 0;
  GruCell cell;
  std::size_t w3 = 0, w4 = 0, b1 = 0;
  std::size_t w5 = 0, w6 = 0, b2 = 0, v = 0;
  std::optional<std::size_t> w_att;
  std::size_t w_out = 0, b_out = 0;

 private:
  // Carries z (mean decoder state of each finished heading) between headings.
  struct HeadingHistory {
    std::vector<Var> means;
  };
  Var start_heading(Tape& t, const HeadingHistory& history, Var closing_state) const;
  Var contexts_for(Tape& t, std::span<const Var> section_states, const ReviewSet& review,
                   Var h_prev, Var* review_ctx, std::vector<Real>* alpha,
                   std::vector<Real>* beta) const;

  ModelConfig config_;
};

}  // namespace og

#endif  // OG_DECODER_HPP
