// Tape-based reverse-mode differentiation over og::Tensor.
//
// A Tape records every operation of one forward pass. Parameters live in a
// ParamSet outside the tape; their gradients accumulate into a GradSet that
// the caller owns, so independent tapes can run on independent workers and
// be reduced afterwards in a fixed order.

#ifndef OG_AUTODIFF_HPP
#define OG_AUTODIFF_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "og/tensor.hpp"

namespace og {

struct Parameter {
  std::string name;
  Tensor value;
};

class ParamSet {
 public:
  // Adds a parameter initialized uniform in [-range, range].
  std::size_t add(std::string name, Shape shape, Rng& rng, Real range);
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

class GradSet {
 public:
  GradSet() = default;
  explicit GradSet(const ParamSet& params);

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_[i]; }
  const Tensor& operator[](std::size_t i) const { return grads_[i]; }

  void zero();
  void add(const GradSet& other, Real weight = Real(1));
  void scale(Real factor);
  Real l2_norm() const;
  bool all_finite() const;

 private:
  std::vector<Tensor> grads_;
};

struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

class Tape {
 public:
  // With grads == nullptr the tape only evaluates; backward() is unavailable.
  explicit Tape(const ParamSet* params = nullptr, GradSet* grads = nullptr);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return grads_ != nullptr; }
  const ParamSet& params() const;

  // Parameter leaf, created once per tape and then reused.
  Var param(std::size_t index);
  Var constant(Tensor value);
  Var zeros(Shape shape);

  const Tensor& value(Var v) const;
  Real scalar(Var v) const;
  // Gradient of the last backward() target with respect to v. Zero-size when
  // v was not reached.
  const Tensor& grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  void backward(Var loss);

  // Op-author interface.
  using Backward = std::function<void(Tape&, Var self)>;
  // The backward closure is kept only on recording tapes.
  template <class F>
  Var record(Tensor value, F&& backward) {
    if (!recording()) return push(std::move(value), nullptr);
    return push(std::move(value), Backward(std::forward<F>(backward)));
  }
  Tensor& grad_acc(Var v);

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;
    Tensor grad;
    Tensor* grad_target = nullptr;
    Backward backward;
  };

  Var push(Tensor value, Backward backward);

  const ParamSet* params_;
  GradSet* grads_;
  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, Var> param_nodes_;
};

// Matrix products. matvec: W[m x n] * x[n]; matvec_t: W[n x m]^T * x[n].
Var matmul(Tape& t, Var a, Var b);
Var matvec(Tape& t, Var w, Var x);
Var matvec_t(Tape& t, Var w, Var x);

Var add(Tape& t, Var a, Var b);
// Row-wise bias: m[r x c] + b[c] on every row.
Var add_rowwise(Tape& t, Var m, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, Real factor);
Var sigmoid(Tape& t, Var x);
Var tanh(Tape& t, Var x);

Var dot(Tape& t, Var a, Var b);
Var sum(Tape& t, Var x);
Var add_n(Tape& t, std::span<const Var> xs);
Var concat(Tape& t, std::span<const Var> xs);
// Stacks shape-{1} scalars into a vector.
Var stack(Tape& t, std::span<const Var> scalars);
// Stacks equal-length vectors as the rows of a matrix.
Var stack_rows(Tape& t, std::span<const Var> rows);
Var pick(Tape& t, Var x, std::size_t index);

Var softmax(Tape& t, Var x);
// sum_i weights[i] * rows[i]
Var weighted_sum(Tape& t, std::span<const Var> rows, Var weights);
// Row `row` of a rank-2 parameter; the gradient lands only in that row.
Var lookup(Tape& t, std::size_t param, std::size_t row);

// -log softmax(logits)[target]
Var nll_softmax(Tape& t, Var logits, std::size_t target);
// Binary cross-entropy of sigmoid(logit) against label in {0,1}.
Var bce_logit(Tape& t, Var logit, int label);

// Plain-tensor helpers used by ops and by tests as independent references.
std::vector<Real> softmax_values(std::span<const Real> x);

}  // namespace og

#endif  // OG_AUTODIFF_HPP
