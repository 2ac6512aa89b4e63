#include "og/boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace og {

std::vector<int> threshold_labels(std::span<const Real> probabilities, Real threshold) {
  std::vector<int> labels(probabilities.size());
  for (std::size_t m = 0; m < probabilities.size(); ++m) {
    labels[m] = probabilities[m] > threshold ? 1 : 0;
  }
  if (!labels.empty()) labels.back() = 1;
  return labels;
}

// ---------------------------------------------------------------------------
// CRF

namespace {

Real log_add(Real a, Real b) {
  const Real mx = std::max(a, b);
  if (mx == -std::numeric_limits<Real>::infinity()) return mx;
  return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

void check_crf(const Tensor& e, const Tensor& tr) {
  if (e.rank() != 2 || e.cols() != 2) throw DimensionError("CRF emissions must be [M x 2], got " + shape_string(e.shape()));
  if (tr.rank() != 2 || tr.rows() != 2 || tr.cols() != 2) {
    throw DimensionError("CRF transitions must be [2 x 2], got " + shape_string(tr.shape()));
  }
}

using Lattice = std::vector<std::array<Real, 2>>;

Lattice forward_lattice(const Tensor& e, const Tensor& tr) {
  const std::size_t m = e.rows();
  Lattice alpha(m);
  alpha[0] = {e.at(0, 0), e.at(0, 1)};
  for (std::size_t i = 1; i < m; ++i) {
    for (int y = 0; y < 2; ++y) {
      alpha[i][y] = log_add(alpha[i - 1][0] + tr.at(0, y), alpha[i - 1][1] + tr.at(1, y)) + e.at(i, y);
    }
  }
  return alpha;
}

Lattice backward_lattice(const Tensor& e, const Tensor& tr) {
  const std::size_t m = e.rows();
  Lattice beta(m);
  beta[m - 1] = {0, 0};
  for (std::size_t i = m - 1; i-- > 0;) {
    for (int y = 0; y < 2; ++y) {
      beta[i][y] = log_add(tr.at(y, 0) + e.at(i + 1, 0) + beta[i + 1][0],
                           tr.at(y, 1) + e.at(i + 1, 1) + beta[i + 1][1]);
    }
  }
  return beta;
}

}  // namespace

Real crf_score(const Tensor& e, const Tensor& tr, std::span<const int> labels) {
  check_crf(e, tr);
  if (labels.size() != e.rows()) throw DimensionError("CRF label count does not match emissions");
  Real s = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += e.at(i, static_cast<std::size_t>(labels[i]));
    if (i > 0) s += tr.at(static_cast<std::size_t>(labels[i - 1]), static_cast<std::size_t>(labels[i]));
  }
  return s;
}

Real crf_log_partition(const Tensor& e, const Tensor& tr) {
  check_crf(e, tr);
  const auto alpha = forward_lattice(e, tr);
  return log_add(alpha.back()[0], alpha.back()[1]);
}

Real crf_loglik(const Tensor& e, const Tensor& tr, std::span<const int> labels) {
  return crf_score(e, tr, labels) - crf_log_partition(e, tr);
}

std::vector<int> crf_viterbi(const Tensor& e, const Tensor& tr) {
  check_crf(e, tr);
  const std::size_t m = e.rows();
  std::vector<std::array<Real, 2>> delta(m);
  std::vector<std::array<int, 2>> back(m, {0, 0});
  delta[0] = {e.at(0, 0), e.at(0, 1)};
  for (std::size_t i = 1; i < m; ++i) {
    for (int y = 0; y < 2; ++y) {
      const Real from0 = delta[i - 1][0] + tr.at(0, y);
      const Real from1 = delta[i - 1][1] + tr.at(1, y);
      back[i][y] = from1 > from0 ? 1 : 0;
      delta[i][y] = std::max(from0, from1) + e.at(i, y);
    }
  }
  std::vector<int> labels(m);
  labels[m - 1] = delta[m - 1][1] > delta[m - 1][0] ? 1 : 0;
  for (std::size_t i = m - 1; i > 0; --i) labels[i - 1] = back[i][labels[i]];
  return labels;
}

std::vector<Real> crf_marginals(const Tensor& e, const Tensor& tr) {
  check_crf(e, tr);
  const auto alpha = forward_lattice(e, tr);
  const auto beta = backward_lattice(e, tr);
  const Real log_z = log_add(alpha.back()[0], alpha.back()[1]);
  std::vector<Real> p(e.rows());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(alpha[i][1] + beta[i][1] - log_z);
  return p;
}

Var crf_nll(Tape& t, Var emissions, Var transitions, std::span<const int> labels) {
  const Tensor& e = t.value(emissions);
  const Tensor& tr = t.value(transitions);
  const Real nll = -crf_loglik(e, tr, labels);
  std::vector<int> gold(labels.begin(), labels.end());
  return t.record(Tensor::scalar(nll), [emissions, transitions, gold = std::move(gold)](Tape& t, Var self) {
    const Real g = t.grad(self)[0];
    const Tensor& e = t.value(emissions);
    const Tensor& tr = t.value(transitions);
    const auto alpha = forward_lattice(e, tr);
    const auto beta = backward_lattice(e, tr);
    const Real log_z = log_add(alpha.back()[0], alpha.back()[1]);
    const std::size_t m = e.rows();
    Tensor& ge = t.grad_acc(emissions);
    for (std::size_t i = 0; i < m; ++i) {
      for (int y = 0; y < 2; ++y) {
        Real marginal = std::exp(alpha[i][y] + beta[i][y] - log_z);
        ge.at(i, y) += g * (marginal - (gold[i] == y ? 1 : 0));
      }
    }
    Tensor& gt = t.grad_acc(transitions);
    for (std::size_t i = 1; i < m; ++i) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          Real pair = std::exp(alpha[i - 1][a] + tr.at(a, b) + e.at(i, b) + beta[i][b] - log_z);
          gt.at(a, b) += g * (pair - ((gold[i - 1] == a && gold[i] == b) ? 1 : 0));
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------

BoundaryModel::BoundaryModel(ParamSet& params, const ModelConfig& config, Rng& rng)
    : variant_(config.boundary) {
  const std::size_t d = config.state_dim();
  const Real range = config.init_range;
  switch (variant_) {
    case BoundaryVariant::kMpd:
      w1 = params.add("boundary.W1", {d, d}, rng, range);
      w2 = params.add("boundary.W2", {d, d}, rng, range);
      break;
    case BoundaryVariant::kMpdMinusP:
      local_w = params.add("boundary.w", {d}, rng, range);
      local_b = params.add("boundary.b", {1}, rng, range);
      break;
    case BoundaryVariant::kGpd:
      gpd_v = params.add("boundary.gpd_v", {config.attn}, rng, range);
      gpd_w1 = params.add("boundary.gpd_W1", {config.attn, d}, rng, range);
      gpd_w2 = params.add("boundary.gpd_W2", {config.attn, d}, rng, range);
      gpd_b = params.add("boundary.gpd_b", {config.attn}, rng, range);
      gpd_bilinear = params.add("boundary.gpd_WG", {d, d}, rng, range);
      break;
    case BoundaryVariant::kCrf:
      crf_w = params.add("boundary.crf_W", {d, 2}, rng, range);
      crf_b = params.add("boundary.crf_b", {2}, rng, range);
      crf_t = params.add("boundary.crf_T", {2, 2}, rng, range);
      break;
  }
}

Var BoundaryModel::mpd_logit(Tape& t, std::optional<Var> prev, Var cur, std::optional<Var> next) const {
  Var left = prev ? dot(t, *prev, matvec(t, t.param(w1), cur)) : t.zeros({1});
  Var right = next ? dot(t, cur, matvec(t, t.param(w2), *next)) : t.zeros({1});
  return add(t, left, right);
}

Var BoundaryModel::local_logit(Tape& t, Var cur) const {
  return add(t, dot(t, t.param(local_w), cur), t.param(local_b));
}

namespace {

// Additive attention of paragraph m over the others, with keys W1 h_j
// precomputed per document.
Var gpd_from_keys(Tape& t, const BoundaryModel& b, std::span<const Var> states,
                  std::span<const Var> keys, std::size_t m, std::vector<Real>* attention) {
  Var bilinear = t.param(b.gpd_bilinear);
  if (states.size() == 1) {
    if (attention) attention->clear();
    return dot(t, states[0], matvec(t, bilinear, states[0]));
  }
  std::array<Var, 2> query_terms{matvec(t, t.param(b.gpd_w2), states[m]), t.param(b.gpd_b)};
  Var query = add_n(t, query_terms);
  Var v = t.param(b.gpd_v);
  std::vector<Var> scores, context_rows;
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (j == m) continue;
    scores.push_back(dot(t, v, tanh(t, add(t, keys[j], query))));
    context_rows.push_back(states[j]);
  }
  Var weights = softmax(t, stack(t, scores));
  if (attention) {
    auto w = t.value(weights).data();
    attention->assign(w.begin(), w.end());
  }
  Var context = weighted_sum(t, context_rows, weights);
  return dot(t, states[m], matvec(t, bilinear, context));
}

}  // namespace

Var BoundaryModel::gpd_logit(Tape& t, std::span<const Var> states, std::size_t m,
                             std::vector<Real>* attention) const {
  if (m >= states.size()) throw std::out_of_range("gpd_logit: paragraph index out of range");
  std::vector<Var> keys;
  for (Var h : states) keys.push_back(matvec(t, t.param(gpd_w1), h));
  return gpd_from_keys(t, *this, states, keys, m, attention);
}

Var BoundaryModel::crf_emissions(Tape& t, std::span<const Var> states) const {
  std::vector<Var> rows;
  rows.reserve(states.size());
  for (Var h : states) rows.push_back(add(t, matvec_t(t, t.param(crf_w), h), t.param(crf_b)));
  return stack_rows(t, rows);
}

std::vector<Var> BoundaryModel::logits(Tape& t, std::span<const Var> states) const {
  const std::size_t m = states.size();
  std::vector<Var> out;
  out.reserve(m);
  switch (variant_) {
    case BoundaryVariant::kMpd:
      for (std::size_t i = 0; i < m; ++i) {
        std::optional<Var> prev = i > 0 ? std::optional<Var>(states[i - 1]) : std::nullopt;
        std::optional<Var> next = i + 1 < m ? std::optional<Var>(states[i + 1]) : std::nullopt;
        out.push_back(mpd_logit(t, prev, states[i], next));
      }
      break;
    case BoundaryVariant::kMpdMinusP:
      for (Var h : states) out.push_back(local_logit(t, h));
      break;
    case BoundaryVariant::kGpd: {
      std::vector<Var> keys;
      keys.reserve(m);
      for (Var h : states) keys.push_back(matvec(t, t.param(gpd_w1), h));
      for (std::size_t i = 0; i < m; ++i) out.push_back(gpd_from_keys(t, *this, states, keys, i, nullptr));
      break;
    }
    case BoundaryVariant::kCrf:
      throw std::logic_error("CRF boundaries have no per-paragraph logits");
  }
  return out;
}

Var BoundaryModel::loss(Tape& t, std::span<const Var> states, std::span<const int> gold) const {
  if (gold.size() != states.size()) throw DimensionError("boundary loss: label count mismatch");
  if (variant_ == BoundaryVariant::kCrf) {
    return crf_nll(t, crf_emissions(t, states), t.param(crf_t), gold);
  }
  auto ls = logits(t, states);
  std::vector<Var> terms;
  terms.reserve(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) terms.push_back(bce_logit(t, ls[i], gold[i]));
  return add_n(t, terms);
}

BoundarySequence BoundaryModel::predict(Tape& t, std::span<const Var> states, Real threshold) const {
  BoundarySequence seq;
  if (variant_ == BoundaryVariant::kCrf) {
    Var em = crf_emissions(t, states);
    const Tensor& tr = t.value(t.param(crf_t));
    seq.probabilities = crf_marginals(t.value(em), tr);
    seq.labels = crf_viterbi(t.value(em), tr);
    seq.labels.back() = 1;
    return seq;
  }
  for (Var l : logits(t, states)) {
    seq.probabilities.push_back(Real(1) / (std::exp(-t.scalar(l)) + Real(1)));
  }
  seq.labels = threshold_labels(seq.probabilities, threshold);
  return seq;
}

}  // namespace og
