//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_GNN_H_
#define MSAN_GNN_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "msan/chem.h"
#include "msan/matrix.h"
#include "msan/random.h"
#include "msan/tensor.h"

namespace msan::gnn {

enum class Backbone { kGCN, kGAT, kGIN };

std::string_view backbone_name(Backbone backbone);
// Accepts "gcn", "gat", "gin" in any case. Throws ConfigError otherwise.
Backbone parse_backbone(std::string_view name);

struct GnnConfig {
  Backbone backbone = Backbone::kGIN;
  int layers = 3;
  int dim = 64;
  int heads = 2;
  bool gin_learn_eps = true;

  // Throws ConfigError unless layers >= 1, dim > 0, heads >= 1 and dim is
  // divisible by heads.
  void validate() const;
};

// Dense per-graph operators, computed once per molecule.
struct GraphOperators {
  Matrix adjacency;      // A, no self loops
  Matrix gcn_norm;       // D^-1/2 (A + I) D^-1/2 with D the degree of A + I
  Matrix neighbor_mask;  // A + I as 0/1
};

GraphOperators graph_operators(const chem::MolecularGraph &graph);

// Registers the encoder weights under `prefix` (input projection plus one
// block per layer).
void register_params(tensor::ParameterStore &store, const GnnConfig &config,
                     std::size_t in_dim, Rng &rng,
                     const std::string &prefix = "gnn");

// ReLU(norm * H * W).
tensor::Var gcn_layer(tensor::Var h, const Matrix &gcn_norm, tensor::Var w);

struct GatHead {
  tensor::Var w;      // d_in x d_head
  tensor::Var a_src;  // d_head x 1, scores the receiving node
  tensor::Var a_dst;  // d_head x 1, scores the neighbor
};

// Multi-head graph attention over neighborhood plus self. Heads are
// concatenated; ELU is applied when `activate` is set. When `attention`
// is non-null it receives one N x N row-stochastic matrix per head.
tensor::Var gat_layer(tensor::Var h, const Matrix &neighbor_mask,
                      const std::vector<GatHead> &heads, bool activate,
                      std::vector<Matrix> *attention = nullptr);

struct GinWeights {
  tensor::Var eps;  // 1 x 1
  tensor::Var w1, b1, w2, b2;
};

// MLP((1 + eps) h_v + sum of neighbor rows); MLP is Linear-ReLU-Linear.
// A trailing ReLU is applied when `activate` is set.
tensor::Var gin_layer(tensor::Var h, const Matrix &adjacency,
                      const GinWeights &weights, bool activate);

// Runs the input projection and all layers; returns the N x dim matrix of
// last-layer node representations.
tensor::Var encode(tensor::Tape &tape, const chem::MolecularGraph &graph,
                   const GraphOperators &ops, const GnnConfig &config,
                   tensor::ParameterStore &params,
                   const std::string &prefix = "gnn");

tensor::Var encode(tensor::Tape &tape, const chem::MolecularGraph &graph,
                   const GnnConfig &config, tensor::ParameterStore &params,
                   const std::string &prefix = "gnn");

}  // namespace msan::gnn

#endif  // MSAN_GNN_H_
