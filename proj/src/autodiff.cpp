#include "og/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace og {

// ---------------------------------------------------------------------------
// ParamSet / GradSet

std::size_t ParamSet::add(std::string name, Shape shape, Rng& rng, Real range) {
  Tensor value(std::move(shape));
  for (auto& x : value.data()) x = static_cast<Real>(rng.uniform(-range, range));
  return add(std::move(name), std::move(value));
}

std::size_t ParamSet::add(std::string name, Tensor value) {
  if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  by_name_.emplace(name, params_.size());
  params_.push_back({std::move(name), std::move(value)});
  return params_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParamSet::index(const std::string& name) const {
  auto found = find(name);
  if (!found) throw std::out_of_range("no parameter named " + name);
  return *found;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

GradSet::GradSet(const ParamSet& params) {
  grads_.reserve(params.size());
  for (const auto& p : params) grads_.emplace_back(p.value.shape());
}

void GradSet::zero() {
  for (auto& g : grads_) g.fill(0);
}

void GradSet::add(const GradSet& other, Real weight) {
  if (other.size() != size()) throw DimensionError("GradSet size mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].data();
    auto src = other.grads_[i].data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += weight * src[j];
  }
}

void GradSet::scale(Real factor) {
  for (auto& g : grads_) {
    for (auto& x : g.data()) x *= factor;
  }
}

Real GradSet::l2_norm() const {
  double sq = 0;
  for (const auto& g : grads_) {
    for (auto x : g.data()) sq += static_cast<double>(x) * x;
  }
  return static_cast<Real>(std::sqrt(sq));
}

bool GradSet::all_finite() const {
  return std::all_of(grads_.begin(), grads_.end(),
                     [](const Tensor& g) { return g.all_finite(); });
}

// ---------------------------------------------------------------------------
// Tape

Tape::Tape(const ParamSet* params, GradSet* grads) : params_(params), grads_(grads) {
  if (grads_ && params_ && grads_->size() != params_->size()) {
    throw DimensionError("GradSet does not match ParamSet");
  }
  nodes_.reserve(1024);
}

const ParamSet& Tape::params() const {
  if (!params_) throw std::logic_error("tape has no parameter set");
  return *params_;
}

Var Tape::param(std::size_t index) {
  auto it = param_nodes_.find(index);
  if (it != param_nodes_.end()) return it->second;
  const auto& p = params()[index];
  Node node;
  node.ref = &p.value;
  if (grads_) node.grad_target = &(*grads_)[index];
  nodes_.push_back(std::move(node));
  Var v{static_cast<std::uint32_t>(nodes_.size() - 1)};
  param_nodes_.emplace(index, v);
  return v;
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::zeros(Shape shape) { return constant(Tensor(std::move(shape))); }

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.ref ? *n.ref : n.value;
}

Real Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  if (t.size() != 1) throw DimensionError("expected a scalar, got " + shape_string(t.shape()));
  return t[0];
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.grad_target ? *n.grad_target : n.grad;
}

Var Tape::push(Tensor value, Backward backward) {
  Node node;
  node.value = std::move(value);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_acc(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad_target) return *n.grad_target;
  if (n.grad.empty()) n.grad = Tensor(value(v).shape());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (!grads_) throw std::logic_error("backward() on a non-recording tape");
  if (value(loss).size() != 1) throw DimensionError("backward() needs a scalar loss");
  grad_acc(loss)[0] += 1;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, Var{static_cast<std::uint32_t>(i)});
  }
}

// ---------------------------------------------------------------------------
// Ops

namespace {

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                       " vs " + shape_string(b.shape()));
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch(op, a, b);
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) mismatch("matmul", av, bv);
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const Real x = av.at(i, p);
      const Real* brow = bv.raw() + p * n;
      Real* orow = out.raw() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  return t.record(std::move(out), [a, b, m, k, n](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    Tensor& ga = t.grad_acc(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        Real s = 0;
        for (std::size_t j = 0; j < n; ++j) s += g.at(i, j) * bv.at(p, j);
        ga.at(i, p) += s;
      }
    Tensor& gb = t.grad_acc(b);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const Real x = av.at(i, p);
        for (std::size_t j = 0; j < n; ++j) gb.at(p, j) += x * g.at(i, j);
      }
  });
}

namespace {

// Four partial sums in a fixed order: deterministic and vectorizable.
Real dot_kernel(const Real* a, const Real* b, std::size_t n) {
  Real s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  for (; j < n; ++j) s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

Var matvec(Tape& t, Var w, Var x) {
  const Tensor& wv = t.value(w);
  const Tensor& xv = t.value(x);
  if (wv.rank() != 2 || xv.rank() != 1 || wv.cols() != xv.size()) mismatch("matvec", wv, xv);
  const std::size_t m = wv.rows(), n = wv.cols();
  Tensor out({m});
  const Real* xp = xv.raw();
  for (std::size_t i = 0; i < m; ++i) out[i] = dot_kernel(wv.raw() + i * n, xp, n);
  return t.record(std::move(out), [w, x, m, n](Tape& t, Var self) {
    const Real* g = t.grad(self).raw();
    const Real* wp = t.value(w).raw();
    const Real* xp = t.value(x).raw();
    Real* gw = t.grad_acc(w).raw();
    Real* gx = t.grad_acc(x).raw();
    for (std::size_t i = 0; i < m; ++i) {
      const Real gi = g[i];
      if (gi == 0) continue;
      Real* gwrow = gw + i * n;
      const Real* wrow = wp + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        gwrow[j] += gi * xp[j];
        gx[j] += wrow[j] * gi;
      }
    }
  });
}

Var matvec_t(Tape& t, Var w, Var x) {
  const Tensor& wv = t.value(w);
  const Tensor& xv = t.value(x);
  if (wv.rank() != 2 || xv.rank() != 1 || wv.rows() != xv.size()) mismatch("matvec_t", wv, xv);
  const std::size_t n = wv.rows(), m = wv.cols();
  Tensor out({m});
  Real* op = out.raw();
  for (std::size_t i = 0; i < n; ++i) {
    const Real xi = xv[i];
    const Real* row = wv.raw() + i * m;
    for (std::size_t j = 0; j < m; ++j) op[j] += row[j] * xi;
  }
  return t.record(std::move(out), [w, x, n, m](Tape& t, Var self) {
    const Real* g = t.grad(self).raw();
    const Real* wp = t.value(w).raw();
    const Real* xp = t.value(x).raw();
    Real* gw = t.grad_acc(w).raw();
    Real* gx = t.grad_acc(x).raw();
    for (std::size_t i = 0; i < n; ++i) {
      const Real xi = xp[i];
      const Real* wrow = wp + i * m;
      Real* gwrow = gw + i * m;
      for (std::size_t j = 0; j < m; ++j) gwrow[j] += xi * g[j];
      gx[i] += dot_kernel(wrow, g, m);
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same("add", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return t.record(std::move(out), [a, b](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_acc(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor& gb = t.grad_acc(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var add_rowwise(Tape& t, Var m, Var b) {
  const Tensor& mv = t.value(m);
  const Tensor& bv = t.value(b);
  if (mv.rank() != 2 || bv.rank() != 1 || mv.cols() != bv.size()) mismatch("add_rowwise", mv, bv);
  const std::size_t rows = mv.rows(), cols = mv.cols();
  Tensor out = mv;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) += bv[c];
  return t.record(std::move(out), [m, b, rows, cols](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& gm = t.grad_acc(m);
    for (std::size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
    Tensor& gb = t.grad_acc(b);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) gb[c] += g.at(r, c);
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same("sub", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return t.record(std::move(out), [a, b](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_acc(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor& gb = t.grad_acc(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same("mul", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return t.record(std::move(out), [a, b](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    Tensor& ga = t.grad_acc(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Tensor& gb = t.grad_acc(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var scale(Tape& t, Var x, Real factor) {
  Tensor out = t.value(x);
  for (auto& v : out.data()) v *= factor;
  return t.record(std::move(out), [x, factor](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_acc(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var sigmoid(Tape& t, Var x) {
  Tensor out = t.value(x);
  for (auto& v : out.data()) v = Real(1) / (std::exp(-v) + Real(1));
  return t.record(std::move(out), [x](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_acc(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (Real(1) - y[i]);
  });
}

Var tanh(Tape& t, Var x) {
  Tensor out = t.value(x);
  for (auto& v : out.data()) v = std::tanh(v);
  return t.record(std::move(out), [x](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_acc(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (Real(1) - y[i] * y[i]);
  });
}

Var dot(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.size() != bv.size()) mismatch("dot", av, bv);
  Real s = 0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return t.record(Tensor::scalar(s), [a, b](Tape& t, Var self) {
    const Real g = t.grad(self)[0];
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    Tensor& ga = t.grad_acc(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * bv[i];
    Tensor& gb = t.grad_acc(b);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * av[i];
  });
}

Var sum(Tape& t, Var x) {
  Real s = 0;
  for (auto v : t.value(x).data()) s += v;
  return t.record(Tensor::scalar(s), [x](Tape& t, Var self) {
    const Real g = t.grad(self)[0];
    for (auto& v : t.grad_acc(x).data()) v += g;
  });
}

Var add_n(Tape& t, std::span<const Var> xs) {
  if (xs.empty()) throw DimensionError("add_n of nothing");
  Tensor out = t.value(xs[0]);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const Tensor& xv = t.value(xs[k]);
    require_same("add_n", out, xv);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += xv[i];
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  return t.record(std::move(out), [inputs = std::move(inputs)](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    for (Var x : inputs) {
      Tensor& gx = t.grad_acc(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
  });
}

Var concat(Tape& t, std::span<const Var> xs) {
  std::size_t total = 0;
  for (Var x : xs) {
    const Tensor& xv = t.value(x);
    if (xv.rank() != 1) throw DimensionError("concat expects vectors, got " + shape_string(xv.shape()));
    total += xv.size();
  }
  if (total == 0) throw DimensionError("concat of nothing");
  Tensor out({total});
  std::size_t off = 0;
  for (Var x : xs) {
    const Tensor& xv = t.value(x);
    std::copy(xv.data().begin(), xv.data().end(), out.raw() + off);
    off += xv.size();
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  return t.record(std::move(out), [inputs = std::move(inputs)](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (Var x : inputs) {
      Tensor& gx = t.grad_acc(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[off + i];
      off += gx.size();
    }
  });
}

Var stack(Tape& t, std::span<const Var> scalars) {
  if (scalars.empty()) throw DimensionError("stack of nothing");
  Tensor out({scalars.size()});
  for (std::size_t i = 0; i < scalars.size(); ++i) out[i] = t.scalar(scalars[i]);
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  return t.record(std::move(out), [inputs = std::move(inputs)](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < inputs.size(); ++i) t.grad_acc(inputs[i])[0] += g[i];
  });
}

Var stack_rows(Tape& t, std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack_rows of nothing");
  const std::size_t cols = t.value(rows[0]).size();
  Tensor out({rows.size(), cols});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Tensor& rv = t.value(rows[r]);
    if (rv.rank() != 1 || rv.size() != cols) mismatch("stack_rows", t.value(rows[0]), rv);
    std::copy(rv.data().begin(), rv.data().end(), out.raw() + r * cols);
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return t.record(std::move(out), [inputs = std::move(inputs), cols](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      Tensor& gr = t.grad_acc(inputs[r]);
      for (std::size_t c = 0; c < cols; ++c) gr[c] += g.at(r, c);
    }
  });
}

Var pick(Tape& t, Var x, std::size_t index) {
  const Tensor& xv = t.value(x);
  if (index >= xv.size()) throw DimensionError("pick index out of range");
  return t.record(Tensor::scalar(xv[index]), [x, index](Tape& t, Var self) {
    t.grad_acc(x)[index] += t.grad(self)[0];
  });
}

std::vector<Real> softmax_values(std::span<const Real> x) {
  if (x.empty()) throw DimensionError("softmax of an empty vector");
  const Real mx = *std::max_element(x.begin(), x.end());
  std::vector<Real> out(x.size());
  Real z = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  return out;
}

Var softmax(Tape& t, Var x) {
  const Tensor& xv = t.value(x);
  if (xv.rank() != 1) throw DimensionError("softmax expects a vector, got " + shape_string(xv.shape()));
  Tensor out = Tensor::vector(softmax_values(xv.data()));
  return t.record(std::move(out), [x](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Real inner = 0;
    for (std::size_t i = 0; i < y.size(); ++i) inner += g[i] * y[i];
    Tensor& gx = t.grad_acc(x);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (g[i] - inner);
  });
}

Var weighted_sum(Tape& t, std::span<const Var> rows, Var weights) {
  const Tensor& wv = t.value(weights);
  if (rows.empty() || wv.size() != rows.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(rows.size()) + " rows vs " +
                         std::to_string(wv.size()) + " weights");
  }
  const std::size_t dim = t.value(rows[0]).size();
  Tensor out({dim});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Tensor& rv = t.value(rows[k]);
    if (rv.size() != dim) mismatch("weighted_sum", t.value(rows[0]), rv);
    const Real a = wv[k];
    for (std::size_t i = 0; i < dim; ++i) out[i] += a * rv[i];
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return t.record(std::move(out), [inputs = std::move(inputs), weights, dim](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& wv = t.value(weights);
    Tensor& gw = t.grad_acc(weights);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const Tensor& rv = t.value(inputs[k]);
      Real s = 0;
      for (std::size_t i = 0; i < dim; ++i) s += g[i] * rv[i];
      gw[k] += s;
      Tensor& gr = t.grad_acc(inputs[k]);
      for (std::size_t i = 0; i < dim; ++i) gr[i] += wv[k] * g[i];
    }
  });
}

Var lookup(Tape& t, std::size_t param, std::size_t row) {
  const Tensor& table = t.params()[param].value;
  if (table.rank() != 2 || row >= table.rows()) {
    throw DimensionError("lookup row " + std::to_string(row) + " outside " +
                         shape_string(table.shape()));
  }
  const std::size_t cols = table.cols();
  Tensor out({cols});
  std::copy(table.raw() + row * cols, table.raw() + (row + 1) * cols, out.raw());
  Var table_var = t.param(param);
  return t.record(std::move(out), [table_var, row, cols](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Real* dst = t.grad_acc(table_var).raw() + row * cols;
    for (std::size_t c = 0; c < cols; ++c) dst[c] += g[c];
  });
}

Var nll_softmax(Tape& t, Var logits, std::size_t target) {
  const Tensor& lv = t.value(logits);
  if (lv.rank() != 1 || target >= lv.size()) {
    throw DimensionError("nll_softmax target " + std::to_string(target) + " outside " +
                         shape_string(lv.shape()));
  }
  const Real mx = *std::max_element(lv.data().begin(), lv.data().end());
  Real z = 0;
  for (auto v : lv.data()) z += std::exp(v - mx);
  const Real loss = std::log(z) + mx - lv[target];
  return t.record(Tensor::scalar(loss), [logits, target, mx, z](Tape& t, Var self) {
    const Real g = t.grad(self)[0];
    const Tensor& lv = t.value(logits);
    Tensor& gl = t.grad_acc(logits);
    for (std::size_t i = 0; i < lv.size(); ++i) gl[i] += g * std::exp(lv[i] - mx) / z;
    gl[target] -= g;
  });
}

Var bce_logit(Tape& t, Var logit, int label) {
  const Real s = t.scalar(logit);
  // -log sigmoid(s) = softplus(-s); -log(1 - sigmoid(s)) = softplus(s)
  const Real x = label ? -s : s;
  const Real loss = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return t.record(Tensor::scalar(loss), [logit, label](Tape& t, Var self) {
    const Real g = t.grad(self)[0];
    const Real p = Real(1) / (std::exp(-t.scalar(logit)) + Real(1));
    t.grad_acc(logit)[0] += g * (p - static_cast<Real>(label ? 1 : 0));
  });
}

}  // namespace og
