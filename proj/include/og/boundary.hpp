// Section boundary prediction over paragraph states: the Markov paragraph
// dependency model (MPD), its current-paragraph-only ablation, the global
// paragraph dependency baseline (GPD), and a linear-chain CRF baseline.

#ifndef OG_BOUNDARY_HPP
#define OG_BOUNDARY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "og/autodiff.hpp"
#include "og/model_config.hpp"

namespace og {

struct BoundarySequence {
  std::vector<int> labels;
  std::vector<Real> probabilities;  // p(l_m = 1)
};

// Labels are p > threshold, with the last paragraph always closing a section.
std::vector<int> threshold_labels(std::span<const Real> probabilities, Real threshold);

// ---------------------------------------------------------------------------
// Linear-chain CRF over labels {0,1}. Emissions are [M x 2], transitions
// [2 x 2] indexed (previous, current). No start or stop scores.

Real crf_score(const Tensor& emissions, const Tensor& transitions, std::span<const int> labels);
Real crf_log_partition(const Tensor& emissions, const Tensor& transitions);
Real crf_loglik(const Tensor& emissions, const Tensor& transitions, std::span<const int> labels);
// Ties prefer label 0.
std::vector<int> crf_viterbi(const Tensor& emissions, const Tensor& transitions);
// Posterior p(l_m = 1) from forward-backward.
std::vector<Real> crf_marginals(const Tensor& emissions, const Tensor& transitions);
// Differentiable -log p(labels).
Var crf_nll(Tape& t, Var emissions, Var transitions, std::span<const int> labels);

// ---------------------------------------------------------------------------

class BoundaryModel {
 public:
  BoundaryModel() = default;
  BoundaryModel(ParamSet& params, const ModelConfig& config, Rng& rng);

  BoundaryVariant variant() const { return variant_; }

  // h_prev . W1 . h_cur + h_cur . W2 . h_next; a missing neighbor counts as
  // the zero vector.
  Var mpd_logit(Tape& t, std::optional<Var> prev, Var cur, std::optional<Var> next) const;
  // w . h_cur + b
  Var local_logit(Tape& t, Var cur) const;
  // h_m . W_G . g_m with g_m an additive-attention summary of the other
  // paragraphs; falls back to h_m . W_G . h_m when M == 1.
  Var gpd_logit(Tape& t, std::span<const Var> states, std::size_t m,
                std::vector<Real>* attention = nullptr) const;
  // CRF emission scores, [M x 2].
  Var crf_emissions(Tape& t, std::span<const Var> states) const;

  // Per-paragraph logits of p(l_m = 1); not available for the CRF variant.
  std::vector<Var> logits(Tape& t, std::span<const Var> states) const;
  // Negative log-likelihood of the gold labels.
  Var loss(Tape& t, std::span<const Var> states, std::span<const int> gold) const;
  BoundarySequence predict(Tape& t, std::span<const Var> states, Real threshold) const;

  // Parameter indices, valid for the active variant only.
  std::size_t w1 = 0, w2 = 0;
  std::size_t local_w = 0, local_b = 0;
  std::size_t gpd_v = 0, gpd_w1 = 0, gpd_w2 = 0, gpd_b = 0, gpd_bilinear = 0;
  std::size_t crf_w = 0, crf_b = 0, crf_t = 0;

 private:
  BoundaryVariant variant_ = BoundaryVariant::kMpd;
};

}  // namespace og

#endif  // OG_BOUNDARY_HPP
