//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_TESTS_TEST_UTIL_H_
#define MSAN_TESTS_TEST_UTIL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "msan/chem.h"
#include "msan/matrix.h"
#include "msan/random.h"
#include "msan/tensor.h"

namespace msan::testing {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng &rng,
                     double lo = -1.0, double hi = 1.0);

// Linear functional <w, x> as a 1 x 1 Var over the row-major entries of
// x, using the leading entries of `w`.
tensor::Var probe(tensor::Var x, const Matrix &w);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation crossed a kink
  std::string worst;        // "param[index]" of the largest error
};

// Compares analytic gradients of `loss` with respect to every parameter in
// `params` against central differences with step `h`. `loss` must build a
// scalar on the tape it receives, using only `params` as learnables. The
// relative error of one coordinate is |a - n| / max(|a|, |n|, 1e-3).
GradCheck check_gradients(tensor::ParameterStore &params,
                          const std::function<tensor::Var(tensor::Tape &)> &loss,
                          double h = 1e-4);

using LossFn = std::function<tensor::Var(tensor::Tape &)>;

// A built scenario: `loss` must be a pure function of `*params` so it can
// be re-evaluated under perturbation. `owner` keeps the store alive.
struct GradInstance {
  std::shared_ptr<void> owner;
  tensor::ParameterStore *params = nullptr;
  LossFn loss;
};

struct GradCase {
  std::string name;  // "<module>.<op>"
  std::function<GradInstance(Rng &)> make;
};

// Builds the case from `seed` and runs check_gradients on it.
GradCheck run_case(const GradCase &c, std::uint64_t seed);

// Each differentiable op and module, plus the
// full encode -> SE -> SI -> predict -> BCE pipeline for each backbone.
const std::vector<GradCase> &gradient_cases();

// Random connected molecule built from a spanning tree plus extra ring
// closures over C, N, O, S, F and Cl atoms.
chem::MolecularGraph random_molecule(Rng &rng, std::size_t min_atoms,
                                     std::size_t max_atoms);

struct CorpusEntry {
  const char *name;
  const char *smiles;
  std::size_t heavy_atoms;  // counted by hand
};

std::span<const CorpusEntry> heavy_atom_corpus();

}  // namespace msan::testing

#endif  // MSAN_TESTS_TEST_UTIL_H_
