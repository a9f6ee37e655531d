//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "msan/error.h"
#include "msan/matrix.h"
#include "msan/tensor.h"
#include "test_util.h"

namespace msan::tensor {
namespace {

using testing::random_matrix;

void check_module(const std::string &prefix, int seeds) {
  for (const auto &c: testing::gradient_cases()) {
    if (c.name.rfind(prefix, 0) != 0)
      continue;
    for (int seed = 0; seed < seeds; ++seed) {
      const auto r = testing::run_case(c, static_cast<std::uint64_t>(seed));
      EXPECT_LT(r.max_rel_error, 1e-4)
          << c.name << " seed " << seed << " worst " << r.worst;
      EXPECT_GT(r.checked, 0U) << c.name;
    }
  }
}

TEST(Gradients, TensorOpsMatchFiniteDifferences) { check_module("tensor.", 10); }

TEST(Gradients, CheckerFlagsWrongBackward) {
  ParameterStore store;
  store.add("x", Matrix(2, 2, std::vector<double> { 0.3, -0.4, 1.1, 0.9 }));
  const auto r = testing::check_gradients(store, [&](Tape &t) {
    Var x = t.param(store.get("x"));
    Matrix doubled = x.value();
    for (double &v: doubled.data())
      v *= 2.0;
    Var y = t.record(doubled, { x }, [x](Tape &tape, std::size_t id) {
      const Matrix &g = tape.grad(id);
      Matrix &gx = tape.grad(x.id());
      for (std::size_t i = 0; i < g.data().size(); ++i)
        gx.data()[i] += 3.0 * g.data()[i];
    });
    return sum_all(y);
  });
  EXPECT_GT(r.max_rel_error, 0.3);
  EXPECT_EQ(r.checked, 4U);
}

TEST(Matrix, MatmulMatchesNaiveProduct) {
  Rng rng = derive_rng(1, 2);
  const Matrix a = random_matrix(4, 5, rng);
  const Matrix b = random_matrix(5, 3, rng);
  const Matrix c = matmul(a, b);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k)
        s += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), s, 1e-12);
    }
}

TEST(Matrix, ShapeErrors) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), Error);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>(3)), Error);
  Tape tape;
  Var a = tape.constant(Matrix(2, 3));
  Var b = tape.constant(Matrix(3, 2));
  EXPECT_THROW(add(a, b), Error);
  EXPECT_THROW(tensor::matmul(a, a), Error);
  try {
    tensor::matmul(a, a);
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Ops, RowSoftmaxRowsSumToOne) {
  Tape tape(Tape::GradMode::kDisabled);
  Matrix x(2, 3, std::vector<double> { 1000.0, 1001.0, 999.0, -5.0, 0.0, 5.0 });
  const Matrix y = row_softmax(tape.constant(x)).value();
  for (std::size_t i = 0; i < 2; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_TRUE(std::isfinite(y(i, j)));
      s += y(i, j);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_GT(y(0, 1), y(0, 0));
}

TEST(Ops, MaskedSoftmaxZeroesMaskedEntries) {
  Tape tape(Tape::GradMode::kDisabled);
  Matrix mask(2, 3, std::vector<double> { 1, 0, 1, 0, 1, 0 });
  const Matrix y =
      masked_row_softmax(tape.constant(Matrix(2, 3, 0.3)), mask).value();
  EXPECT_EQ(y(0, 1), 0.0);
  EXPECT_NEAR(y(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(y(1, 1), 1.0, 1e-12);
  EXPECT_EQ(y(1, 0), 0.0);
}

TEST(Ops, RowNormalizeKeepsZeroRows) {
  Tape tape;
  ParameterStore store;
  auto &p = store.add("x", Matrix(2, 2, std::vector<double> { 3, 4, 0, 0 }));
  Var y = row_normalize(tape.param(p));
  EXPECT_NEAR(y.value()(0, 0), 0.6, 1e-12);
  EXPECT_NEAR(y.value()(0, 1), 0.8, 1e-12);
  EXPECT_EQ(y.value()(1, 0), 0.0);
  EXPECT_EQ(y.value()(1, 1), 0.0);
  tape.backward(sum_all(y));
  for (double g: p.grad.data())
    EXPECT_TRUE(std::isfinite(g));
}

TEST(Ops, ClampBlocksGradientOutsideRange) {
  Tape tape;
  ParameterStore store;
  auto &p = store.add("x", Matrix(1, 3, std::vector<double> { -2.0, 0.5, 3.0 }));
  Var y = clamp(tape.param(p), -1.0, 1.0);
  EXPECT_EQ(y.value()(0, 0), -1.0);
  EXPECT_EQ(y.value()(0, 2), 1.0);
  tape.backward(sum_all(y));
  EXPECT_EQ(p.grad(0, 0), 0.0);
  EXPECT_EQ(p.grad(0, 1), 1.0);
  EXPECT_EQ(p.grad(0, 2), 0.0);
}

TEST(Ops, SharedSubexpressionAccumulates) {
  Tape tape;
  ParameterStore store;
  auto &p = store.add("x", Matrix(2, 2, 1.5));
  Var x = tape.param(p);
  Var y = add(x, scale(x, 2.0));
  tape.backward(sum_all(y));
  for (double g: p.grad.data())
    EXPECT_DOUBLE_EQ(g, 3.0);
  EXPECT_EQ(tape.param(p).id(), x.id());
}

TEST(Ops, GradDisabledRecordsNothing) {
  Tape tape(Tape::GradMode::kDisabled);
  ParameterStore store;
  auto &p = store.add("x", Matrix(2, 2, 1.0));
  Var y = sum_all(relu(tape.param(p)));
  EXPECT_FALSE(tape.needs_grad(y.id()));
  EXPECT_DOUBLE_EQ(y.scalar(), 4.0);
}

TEST(Ops, BceMatchesDirectFormula) {
  Tape tape(Tape::GradMode::kDisabled);
  const std::vector<double> z { -3.0, 0.0, 2.5, 0.7 };
  const std::vector<double> y { 0.0, 1.0, 1.0, 0.0 };
  Matrix logits(4, 1, z);
  const double loss = bce_with_logits(tape.constant(logits), y).scalar();
  double expect = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z[i]));
    expect -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  EXPECT_NEAR(loss, expect / 4.0, 1e-12);
}

TEST(Ops, BceIsStableForExtremeLogits) {
  Tape tape(Tape::GradMode::kDisabled);
  Matrix logits(2, 1, std::vector<double> { 800.0, -800.0 });
  const double agree =
      bce_with_logits(tape.constant(logits), std::vector<double> { 1.0, 0.0 })
          .scalar();
  const double disagree =
      bce_with_logits(tape.constant(logits), std::vector<double> { 0.0, 1.0 })
          .scalar();
  EXPECT_NEAR(agree, 0.0, 1e-12);
  EXPECT_NEAR(disagree, 800.0, 1e-9);
}

TEST(Ops, BceRejectsEmptyBatch) {
  Tape tape;
  try {
    bce_with_logits(tape.constant(Matrix(0, 1)), std::vector<double> {});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyBatch);
  }
}

TEST(Ops, ScalarSigmoid) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-800.0), -1e-300);
  EXPECT_DOUBLE_EQ(sigmoid(800.0), 1.0);
  EXPECT_TRUE(std::isnan(sigmoid(std::numeric_limits<double>::quiet_NaN())));
}

TEST(Adam, MatchesScalarRecurrence) {
  ParameterStore store;
  auto &p = store.add("w", Matrix(1, 1, 0.5));
  Adam adam(store);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.01;
  double m = 0.0, v = 0.0, w = 0.5;
  const double grads[] = { 0.3, -1.2, 0.05, 2.0, -0.7 };
  for (int t = 1; t <= 5; ++t) {
    const double g = grads[t - 1];
    p.grad = Matrix(1, 1, g);
    adam.step(lr);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    w -= lr * mh / (std::sqrt(vh) + eps);
    EXPECT_NEAR(p.value(0, 0), w, 1e-15) << "step " << t;
  }
  EXPECT_EQ(adam.steps(), 5);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore store;
  auto &p = store.add("w", Matrix(1, 2, std::vector<double> { 1.0, 1.0 }));
  Adam adam(store);
  p.grad = Matrix(1, 2, std::vector<double> { 5.0, -0.001 });
  adam.step(0.1);
  EXPECT_NEAR(p.value(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(p.value(0, 1), 1.1, 1e-4);
}

TEST(Adam, MinimizesQuadratic) {
  ParameterStore store;
  auto &p = store.add("w", Matrix(1, 3, std::vector<double> { 4, -3, 2 }));
  Adam adam(store);
  const Matrix target(1, 3, std::vector<double> { 1, 2, 3 });
  const Matrix neg_target(1, 3, std::vector<double> { -1, -2, -3 });
  for (int it = 0; it < 3000; ++it) {
    Tape tape;
    Var d = add(tape.param(p), tape.constant(neg_target));
    Var loss = sum_all(tensor::matmul(d, transpose(d)));
    store.zero_grad();
    tape.backward(loss);
    adam.step(0.01);
  }
  EXPECT_LT(max_abs_diff(p.value, target), 1e-3);
}

TEST(Init, XavierWithinBound) {
  Rng rng = derive_rng(3, 4);
  const Matrix w = xavier_uniform(30, 20, rng);
  const double bound = std::sqrt(6.0 / 50.0);
  double mean = 0.0;
  for (double v: w.data()) {
    EXPECT_LE(std::abs(v), bound);
    mean += v;
  }
  EXPECT_LT(std::abs(mean / 600.0), 0.05);
}

TEST(ParameterStore, MissingNameIsConfigError) {
  ParameterStore store;
  store.add("a", Matrix(1, 1));
  EXPECT_TRUE(store.contains("a"));
  try {
    store.get("b");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
  EXPECT_EQ(store.num_scalars(), 1U);
}

}  // namespace
}  // namespace msan::tensor
