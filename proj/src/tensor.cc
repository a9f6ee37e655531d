//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "msan/error.h"

namespace msan::tensor {
namespace {

std::string shape_str(const Matrix &m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_error(std::string_view op, const Matrix &a,
                              const Matrix &b) {
  throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": " + shape_str(a)
                                             + " vs " + shape_str(b));
}

Tape &tape_of(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape())
    throw Error(ErrorCode::kShapeMismatch, "operands live on different tapes");
  return *a.tape();
}

Tape &tape_of(Var a) {
  if (a.tape() == nullptr)
    throw Error(ErrorCode::kShapeMismatch, "operand is not on a tape");
  return *a.tape();
}

// acc += g * b^T
void accumulate_abt(const Matrix &g, const Matrix &b, Matrix &acc) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto grow = g.row(i);
    auto arow = acc.row(i);
    for (std::size_t k = 0; k < b.rows(); ++k) {
      auto brow = b.row(k);
      double s = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j)
        s += grow[j] * brow[j];
      arow[k] += s;
    }
  }
}

// acc += a^T * g
void accumulate_atb(const Matrix &a, const Matrix &g, Matrix &acc) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    auto grow = g.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      if (aik == 0.0)
        continue;
      auto crow = acc.row(k);
      for (std::size_t j = 0; j < g.cols(); ++j)
        crow[j] += aik * grow[j];
    }
  }
}

template <class F>
Var elementwise(Var x, F &&f, Tape::Backward backward) {
  Tape &t = tape_of(x);
  Matrix out = x.value();
  for (double &v: out.data())
    v = f(v);
  return t.record(std::move(out), { x }, std::move(backward));
}

}  // namespace

Parameter &ParameterStore::add(std::string name, Matrix init) {
  if (contains(name))
    throw Error(ErrorCode::kConfigError, "duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = Matrix(init.rows(), init.cols());
  p->value = std::move(init);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter &ParameterStore::get(std::string_view name) {
  for (auto &p: params_)
    if (p->name == name)
      return *p;
  throw Error(ErrorCode::kConfigError,
              "no parameter named " + std::string(name));
}

const Parameter &ParameterStore::get(std::string_view name) const {
  return const_cast<ParameterStore *>(this)->get(name);
}

bool ParameterStore::contains(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const auto &p) { return p->name == name; });
}

std::size_t ParameterStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto &p: params_)
    n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto &p: params_)
    p->grad.fill(0.0);
}

Matrix xavier_uniform(std::size_t rows, std::size_t cols, Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double &v: m.data())
    v = (2.0 * uniform01(rng) - 1.0) * limit;
  return m;
}

const Matrix &Var::value() const {
  return tape_->value(id_);
}

double Var::scalar() const {
  const Matrix &v = value();
  if (v.size() != 1)
    throw Error(ErrorCode::kShapeMismatch,
                "scalar() on a " + shape_str(v) + " tensor");
  return v.data()[0];
}

Var Tape::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter &param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end())
    return Var(this, it->second);
  Node node;
  node.value = param.value;
  if (mode_ == GradMode::kEnabled) {
    node.param = &param;
    node.needs_grad = true;
  }
  nodes_.push_back(std::move(node));
  param_nodes_.emplace(&param, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents,
                 Backward fn) {
  return record(std::move(value),
                std::span<const Var>(parents.begin(), parents.size()),
                std::move(fn));
}

Var Tape::record(Matrix value, std::span<const Var> parents, Backward fn) {
  Node node;
  node.value = std::move(value);
  for (const Var &p: parents)
    node.needs_grad = node.needs_grad || nodes_[p.id()].needs_grad;
  if (node.needs_grad)
    node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Matrix &Tape::grad(std::size_t id) {
  Node &node = nodes_[id];
  if (!node.grad.same_shape(node.value))
    node.grad = Matrix(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this || loss.value().size() != 1)
    throw Error(ErrorCode::kShapeMismatch,
                "backward needs a 1x1 loss on this tape");
  if (!nodes_[loss.id()].needs_grad)
    return;
  grad(loss.id()).data()[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node &node = nodes_[i];
    if (!node.needs_grad || !node.grad.same_shape(node.value))
      continue;
    if (node.param != nullptr) {
      auto &dst = node.param->grad.data();
      const auto &src = node.grad.data();
      for (std::size_t k = 0; k < src.size(); ++k)
        dst[k] += src[k];
    } else if (node.backward) {
      node.backward(*this, i);
    }
  }
}

Var matmul(Var a, Var b) {
  Tape &t = tape_of(a, b);
  Matrix out = msan::matmul(a.value(), b.value());
  return t.record(std::move(out), { a, b }, [a, b](Tape &t, std::size_t self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(a.id()))
      accumulate_abt(g, t.value(b.id()), t.grad(a.id()));
    if (t.needs_grad(b.id()))
      accumulate_atb(t.value(a.id()), g, t.grad(b.id()));
  });
}

Var add(Var a, Var b) {
  Tape &t = tape_of(a, b);
  if (!a.value().same_shape(b.value()))
    shape_error("add", a.value(), b.value());
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] += b.value().data()[i];
  return t.record(std::move(out), { a, b }, [a, b](Tape &t, std::size_t self) {
    const auto &g = t.grad(self).data();
    for (Var p: { a, b }) {
      if (!t.needs_grad(p.id()))
        continue;
      auto &dst = t.grad(p.id()).data();
      for (std::size_t i = 0; i < g.size(); ++i)
        dst[i] += g[i];
    }
  });
}

Var add_row_broadcast(Var x, Var b) {
  Tape &t = tape_of(x, b);
  if (b.rows() != 1 || b.cols() != x.cols())
    shape_error("add_row_broadcast", x.value(), b.value());
  Matrix out = x.value();
  const Matrix &bias = b.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out(r, c) += bias(0, c);
  return t.record(std::move(out), { x, b }, [x, b](Tape &t, std::size_t self) {
    const Matrix &g = t.grad(self);
    if (t.needs_grad(x.id())) {
      auto &dst = t.grad(x.id()).data();
      for (std::size_t i = 0; i < g.size(); ++i)
        dst[i] += g.data()[i];
    }
    if (t.needs_grad(b.id())) {
      Matrix &db = t.grad(b.id());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c)
          db(0, c) += g(r, c);
    }
  });
}

Var outer_sum(Var a, Var b) {
  Tape &t = tape_of(a, b);
  if (a.cols() != 1 || b.cols() != 1)
    shape_error("outer_sum", a.value(), b.value());
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      out(i, j) = a.value()(i, 0) + b.value()(j, 0);
  return t.record(std::move(out), { a, b }, [a, b](Tape &t, std::size_t self) {
    const Matrix &g = t.grad(self);
    const bool ga = t.needs_grad(a.id());
    const bool gb = t.needs_grad(b.id());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < g.cols(); ++j) {
        if (ga)
          t.grad(a.id())(i, 0) += g(i, j);
        if (gb)
          t.grad(b.id())(j, 0) += g(i, j);
      }
    }
  });
}

Var scale(Var x, double c) {
  return elementwise(
      x, [c](double v) { return c * v; },
      [x, c](Tape &t, std::size_t self) {
        const auto &g = t.grad(self).data();
        auto &dst = t.grad(x.id()).data();
        for (std::size_t i = 0; i < g.size(); ++i)
          dst[i] += c * g[i];
      });
}

Var mul_scalar(Var s, Var x) {
  Tape &t = tape_of(s, x);
  if (s.value().size() != 1)
    shape_error("mul_scalar", s.value(), x.value());
  const double k = s.value().data()[0];
  Matrix out = x.value();
  for (double &v: out.data())
    v *= k;
  return t.record(std::move(out), { s, x }, [s, x](Tape &t, std::size_t self) {
    const auto &g = t.grad(self).data();
    const auto &xv = t.value(x.id()).data();
    const double k = t.value(s.id()).data()[0];
    if (t.needs_grad(s.id())) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        acc += g[i] * xv[i];
      t.grad(s.id()).data()[0] += acc;
    }
    if (t.needs_grad(x.id())) {
      auto &dst = t.grad(x.id()).data();
      for (std::size_t i = 0; i < g.size(); ++i)
        dst[i] += k * g[i];
    }
  });
}

Var transpose(Var x) {
  Tape &t = tape_of(x);
  return t.record(x.value().transpose(), { x },
                  [x](Tape &t, std::size_t self) {
                    const Matrix &g = t.grad(self);
                    Matrix &dst = t.grad(x.id());
                    for (std::size_t r = 0; r < g.rows(); ++r)
                      for (std::size_t c = 0; c < g.cols(); ++c)
                        dst(c, r) += g(r, c);
                  });
}

Var relu(Var x) {
  Tape &t = tape_of(x);
  for (double v: x.value().data())
    t.note_kink(v > 0.0);
  return elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [x](Tape &t, std::size_t self) {
        const auto &g = t.grad(self).data();
        const auto &xv = t.value(x.id()).data();
        auto &dst = t.grad(x.id()).data();
        for (std::size_t i = 0; i < g.size(); ++i)
          if (xv[i] > 0.0)
            dst[i] += g[i];
      });
}

Var leaky_relu(Var x, double slope) {
  Tape &t = tape_of(x);
  for (double v: x.value().data())
    t.note_kink(v > 0.0);
  return elementwise(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [x, slope](Tape &t, std::size_t self) {
        const auto &g = t.grad(self).data();
        const auto &xv = t.value(x.id()).data();
        auto &dst = t.grad(x.id()).data();
        for (std::size_t i = 0; i < g.size(); ++i)
          dst[i] += (xv[i] > 0.0 ? 1.0 : slope) * g[i];
      });
}

Var elu(Var x) {
  Tape &t = tape_of(x);
  for (double v: x.value().data())
    t.note_kink(v > 0.0);
  return elementwise(
      x, [](double v) { return v > 0.0 ? v : std::expm1(v); },
      [x](Tape &t, std::size_t self) {
        const auto &g = t.grad(self).data();
        const auto &xv = t.value(x.id()).data();
        auto &dst = t.grad(x.id()).data();
        for (std::size_t i = 0; i < g.size(); ++i)
          dst[i] += (xv[i] > 0.0 ? 1.0 : std::exp(xv[i])) * g[i];
      });
}

double sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(Var x) {
  return elementwise(
      x, [](double v) { return sigmoid(v); },
      [x](Tape &t, std::size_t self) {
        const auto &g = t.grad(self).data();
        const auto &y = t.value(self).data();
        auto &dst = t.grad(x.id()).data();
        for (std::size_t i = 0; i < g.size(); ++i)
          dst[i] += y[i] * (1.0 - y[i]) * g[i];
      });
}

Var clamp(Var x, double lo, double hi) {
  return elementwise(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [x, lo, hi](Tape &t, std::size_t self) {
        const auto &g = t.grad(self).data();
        const auto &xv = t.value(x.id()).data();
        auto &dst = t.grad(x.id()).data();
        for (std::size_t i = 0; i < g.size(); ++i)
          if (xv[i] >= lo && xv[i] <= hi)
            dst[i] += g[i];
      });
}

namespace {

// Shared backward of the softmax family: dx = y * (g - <g, y>) per row.
void softmax_backward(Tape &t, std::size_t self, Var x) {
  const Matrix &g = t.grad(self);
  const Matrix &y = t.value(self);
  Matrix &dst = t.grad(x.id());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c)
      dot += g(r, c) * y(r, c);
    for (std::size_t c = 0; c < y.cols(); ++c)
      dst(r, c) += y(r, c) * (g(r, c) - dot);
  }
}

}  // namespace

Var row_softmax(Var x) {
  Tape &t = tape_of(x);
  Matrix out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double &v: row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double &v: row)
      v /= total;
  }
  return t.record(std::move(out), { x }, [x](Tape &t, std::size_t self) {
    softmax_backward(t, self, x);
  });
}

Var masked_row_softmax(Var x, const Matrix &mask) {
  Tape &t = tape_of(x);
  if (!mask.same_shape(x.value()))
    shape_error("masked_row_softmax", x.value(), mask);
  Matrix out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.cols(); ++c)
      if (mask(r, c) != 0.0)
        mx = std::max(mx, out(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out(r, c) = mask(r, c) != 0.0 ? std::exp(out(r, c) - mx) : 0.0;
      total += out(r, c);
    }
    if (total > 0.0)
      for (std::size_t c = 0; c < out.cols(); ++c)
        out(r, c) /= total;
  }
  return t.record(std::move(out), { x }, [x](Tape &t, std::size_t self) {
    softmax_backward(t, self, x);
  });
}

Var row_normalize(Var x) {
  Tape &t = tape_of(x);
  Matrix out = x.value();
  std::vector<double> norms(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double sq = 0.0;
    for (double v: out.row(r))
      sq += v * v;
    norms[r] = std::sqrt(sq);
    t.note_kink(norms[r] > 0.0);
    for (double &v: out.row(r))
      v = norms[r] > 0.0 ? v / norms[r] : 0.0;
  }
  return t.record(std::move(out), { x },
                  [x, norms = std::move(norms)](Tape &t, std::size_t self) {
                    const Matrix &g = t.grad(self);
                    const Matrix &y = t.value(self);
                    Matrix &dst = t.grad(x.id());
                    for (std::size_t r = 0; r < y.rows(); ++r) {
                      if (norms[r] == 0.0)
                        continue;
                      double dot = 0.0;
                      for (std::size_t c = 0; c < y.cols(); ++c)
                        dot += g(r, c) * y(r, c);
                      for (std::size_t c = 0; c < y.cols(); ++c)
                        dst(r, c) += (g(r, c) - y(r, c) * dot) / norms[r];
                    }
                  });
}

Var concat_cols(std::initializer_list<Var> xs) {
  return concat_cols(std::span<const Var>(xs.begin(), xs.size()));
}

Var concat_cols(std::span<const Var> xs) {
  if (xs.empty())
    throw Error(ErrorCode::kShapeMismatch, "concat_cols of nothing");
  Tape &t = tape_of(xs.front());
  const std::size_t rows = xs.front().rows();
  std::size_t cols = 0;
  for (const Var &v: xs) {
    tape_of(xs.front(), v);
    if (v.rows() != rows)
      shape_error("concat_cols", xs.front().value(), v.value());
    cols += v.cols();
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (const Var &v: xs) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c)
        out(r, off + c) = v.value()(r, c);
    off += v.cols();
  }
  std::vector<Var> parts(xs.begin(), xs.end());
  return t.record(std::move(out), xs,
                  [parts = std::move(parts)](Tape &t, std::size_t self) {
                    const Matrix &g = t.grad(self);
                    std::size_t off = 0;
                    for (const Var &v: parts) {
                      const std::size_t w = t.value(v.id()).cols();
                      if (t.needs_grad(v.id())) {
                        Matrix &dst = t.grad(v.id());
                        for (std::size_t r = 0; r < g.rows(); ++r)
                          for (std::size_t c = 0; c < w; ++c)
                            dst(r, c) += g(r, off + c);
                      }
                      off += w;
                    }
                  });
}

Var concat_rows(std::span<const Var> xs) {
  if (xs.empty())
    throw Error(ErrorCode::kShapeMismatch, "concat_rows of nothing");
  Tape &t = tape_of(xs.front());
  const std::size_t cols = xs.front().cols();
  std::vector<double> data;
  std::size_t rows = 0;
  for (const Var &v: xs) {
    tape_of(xs.front(), v);
    if (v.cols() != cols)
      shape_error("concat_rows", xs.front().value(), v.value());
    data.insert(data.end(), v.value().data().begin(), v.value().data().end());
    rows += v.rows();
  }
  std::vector<Var> parts(xs.begin(), xs.end());
  return t.record(Matrix(rows, cols, std::move(data)), xs,
                  [parts = std::move(parts)](Tape &t, std::size_t self) {
                    const auto &g = t.grad(self).data();
                    std::size_t off = 0;
                    for (const Var &v: parts) {
                      const std::size_t n = t.value(v.id()).size();
                      if (t.needs_grad(v.id())) {
                        auto &dst = t.grad(v.id()).data();
                        for (std::size_t i = 0; i < n; ++i)
                          dst[i] += g[off + i];
                      }
                      off += n;
                    }
                  });
}

Var sum_rows(Var x) {
  Tape &t = tape_of(x);
  Matrix out(1, x.cols());
  const Matrix &v = x.value();
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c)
      out(0, c) += v(r, c);
  return t.record(std::move(out), { x }, [x](Tape &t, std::size_t self) {
    const Matrix &g = t.grad(self);
    Matrix &dst = t.grad(x.id());
    for (std::size_t r = 0; r < dst.rows(); ++r)
      for (std::size_t c = 0; c < dst.cols(); ++c)
        dst(r, c) += g(0, c);
  });
}

Var sum_all(Var x) {
  Tape &t = tape_of(x);
  double total = 0.0;
  for (double v: x.value().data())
    total += v;
  return t.record(Matrix(1, 1, total), { x }, [x](Tape &t, std::size_t self) {
    const double g = t.grad(self).data()[0];
    for (double &d: t.grad(x.id()).data())
      d += g;
  });
}

Var flatten(Var x) {
  Tape &t = tape_of(x);
  const Matrix &v = x.value();
  return t.record(Matrix(1, v.size(), v.data()), { x },
                  [x](Tape &t, std::size_t self) {
                    const auto &g = t.grad(self).data();
                    auto &dst = t.grad(x.id()).data();
                    for (std::size_t i = 0; i < g.size(); ++i)
                      dst[i] += g[i];
                  });
}

Var bce_with_logits(Var logits, std::span<const double> labels) {
  Tape &t = tape_of(logits);
  const Matrix &y = logits.value();
  if (y.size() == 0 || labels.empty())
    throw Error(ErrorCode::kEmptyBatch, "bce_with_logits on an empty batch");
  if (y.cols() != 1 || y.rows() != labels.size())
    throw Error(ErrorCode::kShapeMismatch,
                "bce_with_logits: " + shape_str(y) + " logits vs "
                    + std::to_string(labels.size()) + " labels");
  const double n = static_cast<double>(labels.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double z = y(i, 0);
    loss += std::max(z, 0.0) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
  }
  std::vector<double> targets(labels.begin(), labels.end());
  return t.record(Matrix(1, 1, loss / n), { logits },
                  [logits, targets = std::move(targets), n](Tape &t,
                                                            std::size_t self) {
                    const double g = t.grad(self).data()[0];
                    const Matrix &z = t.value(logits.id());
                    Matrix &dst = t.grad(logits.id());
                    for (std::size_t i = 0; i < targets.size(); ++i)
                      dst(i, 0) += g * (sigmoid(z(i, 0)) - targets[i]) / n;
                  });
}

Adam::Adam(ParameterStore &params, double beta1, double beta2, double eps)
    : params_(&params), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix &v = params[i].value;
    m_.emplace_back(v.rows(), v.cols());
    v_.emplace_back(v.rows(), v.cols());
  }
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t p = 0; p < params_->size(); ++p) {
    auto &value = (*params_)[p].value.data();
    const auto &grad = (*params_)[p].grad.data();
    auto &m = m_[p].data();
    auto &v = v_[p].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace msan::tensor
