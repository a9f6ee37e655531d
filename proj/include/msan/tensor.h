//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_TENSOR_H_
#define MSAN_TENSOR_H_

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "msan/matrix.h"
#include "msan/random.h"

namespace msan::tensor {

// A named learnable matrix and its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Owns all learnable weights of a model in registration order. Addresses
// of registered parameters are stable for the lifetime of the store.
class ParameterStore {
public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore &) = delete;
  ParameterStore &operator=(const ParameterStore &) = delete;
  ParameterStore(ParameterStore &&) = default;
  ParameterStore &operator=(ParameterStore &&) = default;

  Parameter &add(std::string name, Matrix init);

  Parameter &get(std::string_view name);
  const Parameter &get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  Parameter &operator[](std::size_t i) { return *params_[i]; }
  const Parameter &operator[](std::size_t i) const { return *params_[i]; }

  std::size_t num_scalars() const;
  void zero_grad();

private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

// Glorot/Xavier uniform initialization.
Matrix xavier_uniform(std::size_t rows, std::size_t cols, Rng &rng);

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
public:
  Var() = default;

  const Matrix &value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;
  Tape *tape() const { return tape_; }
  std::size_t id() const { return id_; }

private:
  friend class Tape;
  Var(Tape *tape, std::size_t id): tape_(tape), id_(id) { }

  Tape *tape_ = nullptr;
  std::size_t id_ = 0;
};

// Gradient tape. Nodes are appended in evaluation order, so reverse index
// order is a valid reverse topological order and backward visits each
// node once. Nodes that cannot reach a parameter record no backward
// closure, which makes a tape without parameters a cheap no-grad pass.
class Tape {
public:
  using Backward = std::function<void(Tape &, std::size_t)>;

  enum class GradMode { kEnabled, kDisabled };

  explicit Tape(GradMode mode = GradMode::kEnabled): mode_(mode) { }
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Matrix value);
  // Leaf bound to `param`; the same parameter maps to one node per tape.
  // Under GradMode::kDisabled the leaf is a plain constant.
  Var param(Parameter &param);

  // Seeds d(loss)/d(loss) = 1 and accumulates into Parameter::grad.
  void backward(Var loss);

  // Records an op result. `parents` decide whether the node needs a
  // gradient; `fn` runs during backward only in that case.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward fn);
  Var record(Matrix value, std::span<const Var> parents, Backward fn);

  const Matrix &value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  // Gradient buffer of `id`, allocated on first use.
  Matrix &grad(std::size_t id);

  std::size_t size() const { return nodes_.size(); }

  // Side of every non-differentiable point (ReLU-family zero crossings,
  // zero-norm rows) the forward pass touched. Two evaluations with equal
  // signatures lie in the same smooth piece of the function.
  const std::vector<bool> &kink_signature() const { return kinks_; }
  void note_kink(bool side) { kinks_.push_back(side); }

private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter *param = nullptr;
    bool needs_grad = false;
  };

  GradMode mode_;
  std::deque<Node> nodes_;  // references survive push_back
  std::unordered_map<Parameter *, std::size_t> param_nodes_;
  std::vector<bool> kinks_;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
// x (N x d) + b (1 x d) broadcast over rows.
Var add_row_broadcast(Var x, Var b);
// a (N x 1), b (M x 1) -> N x M with out(i, j) = a(i) + b(j).
Var outer_sum(Var a, Var b);
Var scale(Var x, double c);
// s (1 x 1) times x.
Var mul_scalar(Var s, Var x);
Var transpose(Var x);

Var relu(Var x);
Var leaky_relu(Var x, double slope);
Var elu(Var x);
Var sigmoid(Var x);
// Gradient flows only where lo <= x <= hi.
Var clamp(Var x, double lo, double hi);

// Softmax over each row, max-subtracted.
Var row_softmax(Var x);
// Softmax over the entries of each row where mask(i, j) != 0; masked
// entries are exactly 0. Every row needs at least one unmasked entry.
Var masked_row_softmax(Var x, const Matrix &mask);
// Each row scaled to unit L2 norm; all-zero rows stay zero.
Var row_normalize(Var x);

Var concat_cols(std::span<const Var> xs);
Var concat_cols(std::initializer_list<Var> xs);
Var concat_rows(std::span<const Var> xs);
Var sum_rows(Var x);
Var sum_all(Var x);
// Row-major reshape to 1 x (rows * cols).
Var flatten(Var x);

// Mean binary cross-entropy on logits (n x 1) in the log-sum-exp form.
// Throws EmptyBatch when n == 0.
Var bce_with_logits(Var logits, std::span<const double> labels);

double sigmoid(double x);

// Bias-corrected Adam (beta1 0.9, beta2 0.999, eps 1e-8 by default).
class Adam {
public:
  explicit Adam(ParameterStore &params, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  // Applies one update from the gradients currently held in the store.
  void step(double lr);

  long steps() const { return t_; }

private:
  ParameterStore *params_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace msan::tensor

#endif  // MSAN_TENSOR_H_
