//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_MODEL_H_
#define MSAN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "msan/chem.h"
#include "msan/gnn.h"
#include "msan/matrix.h"
#include "msan/random.h"
#include "msan/tensor.h"

namespace msan::model {

struct ModelConfig {
  gnn::GnnConfig gnn;
  int patterns = 60;  // M
  int num_types = 1;  // T
  std::size_t feature_dim = 0;  // F; 0 means chem::kFeatureDim
  // false removes the substructure modules; the head sees [g1 || g2 || t].
  bool use_substructures = true;

  void validate() const;
  std::size_t input_dim() const;
  // Width of the prediction-head input: 2d + M^2 + T (or 2d + T).
  std::size_t head_input_dim() const;
};

// Learnable weights of substructure extraction as tape leaves.
struct PatternWeights {
  tensor::Var queries;  // Q0, M x d
  tensor::Var w_q, w_k, w_v, w_o;  // d x d each
};

// Representative vectors O (M x d) and atom attention A (M x N).
struct SeOutput {
  tensor::Var reps;
  tensor::Var attn;
};

// Cross-attention from the M pattern queries to the node embeddings:
// A = softmax_rows(Q K^T / sqrt(d)) over atoms, O = ReLU((Q + A V) W_O)
// with Q = Q0 W_Q, K = H W_K, V = H W_V.
SeOutput se_extract(tensor::Var node_embeddings, const PatternWeights &w);

struct AtomAssignment {
  std::vector<std::size_t> pattern_of_atom;

  // Distinct patterns owning at least one atom, ascending.
  std::vector<std::size_t> used_patterns() const;
};

// Per-atom argmax over the pattern axis of `attn` (M x N); ties go to the
// lowest pattern index.
AtomAssignment assign_atoms(const Matrix &attn);

// Uniform choice among the patterns that own at least one atom.
std::size_t pick_substructure(const AtomAssignment &assignment, Rng &rng);

// Copy of `graph` with the feature rows of every atom assigned to
// `pattern` set to zero. Atoms and bonds are untouched.
chem::MolecularGraph drop_substructure(const chem::MolecularGraph &graph,
                                       const AtomAssignment &assignment,
                                       std::size_t pattern);

// pick_substructure followed by drop_substructure.
chem::MolecularGraph sd_augment(const chem::MolecularGraph &graph,
                                const AtomAssignment &assignment, Rng &rng);

// S(i, j) = cosine(O1 row i, O2 row j), clamped to [-1, 1]. A zero row has
// cosine 0 with everything.
tensor::Var si_similarity(tensor::Var reps1, tensor::Var reps2);

// Column sums of the node matrix.
tensor::Var readout(tensor::Var node_embeddings);

struct HeadWeights {
  tensor::Var w1, b1, w2, b2;
};

// MLP([g1 || g2 || flatten(S) || t]) -> 1 x 1 logit. `similarity` may be
// empty (default Var) for the ablated head.
tensor::Var predict_logit(tensor::Var g1, tensor::Var g2,
                          std::optional<tensor::Var> similarity,
                          tensor::Var type_one_hot, const HeadWeights &head);

Matrix one_hot_type(int type, int num_types);

enum class Mode { kTrain, kEval };

// Per-call record of the augmentation decisions, for inspection.
struct ForwardTrace {
  bool augmented[2] = { false, false };
  std::size_t dropped_pattern[2] = { 0, 0 };
};

// Everything one drug contributes to a pair.
struct DrugEncoding {
  tensor::Var nodes;  // H, N x d
  tensor::Var graph;  // g, 1 x d
  std::optional<SeOutput> se;
};

class MsanModel {
public:
  MsanModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig &config() const { return config_; }
  tensor::ParameterStore &params() { return params_; }
  const tensor::ParameterStore &params() const { return params_; }

  PatternWeights pattern_weights(tensor::Tape &tape);
  HeadWeights head_weights(tensor::Tape &tape);

  // GNN node embeddings plus readout; pattern attention unless ablated.
  DrugEncoding encode_drug(tensor::Tape &tape,
                           const chem::MolecularGraph &graph);

  // Gradient-free pass with the current weights: attention of the pattern
  // queries over the atoms of `graph`, then per-atom argmax.
  AtomAssignment assignment_for(const chem::MolecularGraph &graph);

  tensor::Var logit_from(tensor::Tape &tape, const DrugEncoding &d1,
                         const DrugEncoding &d2, int type);

  // Full pair forward. In training mode each graph is independently
  // replaced by its substructure-dropped version with probability 0.5;
  // `rng` is required in that mode.
  tensor::Var forward_pair(tensor::Tape &tape,
                           const chem::MolecularGraph &drug1,
                           const chem::MolecularGraph &drug2, int type,
                           Mode mode, Rng *rng = nullptr,
                           ForwardTrace *trace = nullptr);

  // Eval-mode logit without gradients.
  double logit(const chem::MolecularGraph &drug1,
               const chem::MolecularGraph &drug2, int type);

private:
  ModelConfig config_;
  tensor::ParameterStore params_;
};

inline constexpr double kAugmentProbability = 0.5;

}  // namespace msan::model

#endif  // MSAN_MODEL_H_
