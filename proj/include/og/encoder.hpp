// Hierarchical bi-directional GRU encoder: words within a paragraph, then
// paragraphs within a document.

#ifndef OG_ENCODER_HPP
#define OG_ENCODER_HPP

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "og/autodiff.hpp"
#include "og/model_config.hpp"

namespace og {

// Parameter indices of one GRU cell inside a ParamSet.
struct GruCell {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t wz = 0, uz = 0, bz = 0;
  std::size_t wr = 0, ur = 0, br = 0;
  std::size_t wh = 0, uh = 0, bh = 0;

  static GruCell create(ParamSet& params, const std::string& prefix, std::size_t input,
                        std::size_t hidden, Rng& rng, Real range);
};

// z = s(Wz x + Uz h + bz), r = s(Wr x + Ur h + br),
// c = tanh(Wh x + Uh (r*h) + bh), h' = (1 - z)*h + z*c
Var gru_step(Tape& t, const GruCell& cell, Var x, Var h_prev);

struct BiRnnOutput {
  std::vector<Var> forward;   // forward[i] has read inputs[0..i]
  std::vector<Var> backward;  // backward[i] has read inputs[i..n-1]
};

BiRnnOutput run_bidirectional(Tape& t, const GruCell& fwd, const GruCell& bwd,
                              std::span<const Var> inputs);

struct EncodedDocument {
  std::vector<std::vector<Var>> word_states;  // per paragraph, each 2H
  std::vector<Var> paragraph_embeddings;      // r_m, 2H
  std::vector<Var> paragraph_states;          // h_m, 2H
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(ParamSet& params, const ModelConfig& config, Rng& rng);

  // Word states [fwd_v || bwd_v] and the paragraph embedding
  // [fwd_last || bwd_first].
  std::pair<std::vector<Var>, Var> encode_paragraph(Tape& t, std::span<const int> tokens) const;
  std::vector<Var> encode_document(Tape& t, std::span<const Var> paragraph_embeddings) const;
  EncodedDocument encode(Tape& t, const std::vector<std::vector<int>>& paragraphs) const;

  std::size_t embedding = 0;
  GruCell word_fwd, word_bwd, para_fwd, para_bwd;
};

}  // namespace og

#endif  // OG_ENCODER_HPP
