//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/gnn.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "msan/error.h"

namespace msan::gnn {

using tensor::Var;

std::string_view backbone_name(Backbone backbone) {
  switch (backbone) {
  case Backbone::kGCN:
    return "gcn";
  case Backbone::kGAT:
    return "gat";
  case Backbone::kGIN:
    return "gin";
  }
  return "unknown";
}

Backbone parse_backbone(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "gcn")
    return Backbone::kGCN;
  if (lower == "gat")
    return Backbone::kGAT;
  if (lower == "gin")
    return Backbone::kGIN;
  throw Error(ErrorCode::kConfigError,
              "unknown backbone '" + std::string(name) + "'");
}

void GnnConfig::validate() const {
  if (layers < 1)
    throw Error(ErrorCode::kConfigError, "gnn.layers must be >= 1");
  if (dim <= 0)
    throw Error(ErrorCode::kConfigError, "gnn.dim must be > 0");
  if (heads < 1 || dim % heads != 0)
    throw Error(ErrorCode::kConfigError,
                "gnn.heads must be >= 1 and divide gnn.dim");
}

GraphOperators graph_operators(const chem::MolecularGraph &graph) {
  const std::size_t n = graph.num_atoms();
  GraphOperators ops { Matrix(n, n), Matrix(n, n), Matrix::identity(n) };
  for (const auto &bond: graph.bonds) {
    ops.adjacency(bond.begin, bond.end) = 1.0;
    ops.adjacency(bond.end, bond.begin) = 1.0;
    ops.neighbor_mask(bond.begin, bond.end) = 1.0;
    ops.neighbor_mask(bond.end, bond.begin) = 1.0;
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      deg += ops.neighbor_mask(i, j);
    inv_sqrt[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      ops.gcn_norm(i, j) = ops.neighbor_mask(i, j) * inv_sqrt[i] * inv_sqrt[j];
  return ops;
}

namespace {

std::string layer_prefix(const std::string &prefix, int layer) {
  return prefix + ".layer" + std::to_string(layer);
}

}  // namespace

void register_params(tensor::ParameterStore &store, const GnnConfig &config,
                     std::size_t in_dim, Rng &rng, const std::string &prefix) {
  config.validate();
  const auto d = static_cast<std::size_t>(config.dim);
  store.add(prefix + ".input.w", tensor::xavier_uniform(in_dim, d, rng));
  store.add(prefix + ".input.b", Matrix(1, d));

  for (int l = 0; l < config.layers; ++l) {
    const std::string p = layer_prefix(prefix, l);
    switch (config.backbone) {
    case Backbone::kGCN:
      store.add(p + ".w", tensor::xavier_uniform(d, d, rng));
      break;
    case Backbone::kGAT: {
      const auto dh = d / static_cast<std::size_t>(config.heads);
      for (int h = 0; h < config.heads; ++h) {
        const std::string hp = p + ".head" + std::to_string(h);
        store.add(hp + ".w", tensor::xavier_uniform(d, dh, rng));
        store.add(hp + ".a_src", tensor::xavier_uniform(dh, 1, rng));
        store.add(hp + ".a_dst", tensor::xavier_uniform(dh, 1, rng));
      }
      break;
    }
    case Backbone::kGIN:
      if (config.gin_learn_eps)
        store.add(p + ".eps", Matrix(1, 1));
      store.add(p + ".w1", tensor::xavier_uniform(d, d, rng));
      store.add(p + ".b1", Matrix(1, d));
      store.add(p + ".w2", tensor::xavier_uniform(d, d, rng));
      store.add(p + ".b2", Matrix(1, d));
      break;
    }
  }
}

Var gcn_layer(Var h, const Matrix &gcn_norm, Var w) {
  tensor::Tape &tape = *h.tape();
  if (gcn_norm.rows() != h.rows() || gcn_norm.cols() != h.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "gcn_layer: operator does not match node count");
  return tensor::relu(
      tensor::matmul(tape.constant(gcn_norm), tensor::matmul(h, w)));
}

Var gat_layer(Var h, const Matrix &neighbor_mask,
              const std::vector<GatHead> &heads, bool activate,
              std::vector<Matrix> *attention) {
  if (neighbor_mask.rows() != h.rows() || neighbor_mask.cols() != h.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "gat_layer: mask does not match node count");
  std::vector<Var> outputs;
  outputs.reserve(heads.size());
  for (const GatHead &head: heads) {
    Var wh = tensor::matmul(h, head.w);
    Var scores = tensor::outer_sum(tensor::matmul(wh, head.a_src),
                                   tensor::matmul(wh, head.a_dst));
    Var alpha = tensor::masked_row_softmax(tensor::leaky_relu(scores, 0.2),
                                           neighbor_mask);
    if (attention != nullptr)
      attention->push_back(alpha.value());
    outputs.push_back(tensor::matmul(alpha, wh));
  }
  Var out = outputs.size() == 1 ? outputs.front()
                                : tensor::concat_cols(outputs);
  return activate ? tensor::elu(out) : out;
}

Var gin_layer(Var h, const Matrix &adjacency, const GinWeights &weights,
              bool activate) {
  tensor::Tape &tape = *h.tape();
  if (adjacency.rows() != h.rows() || adjacency.cols() != h.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "gin_layer: adjacency does not match node count");
  Var self = tensor::add(h, tensor::mul_scalar(weights.eps, h));
  Var agg = tensor::add(self, tensor::matmul(tape.constant(adjacency), h));
  Var hidden = tensor::relu(tensor::add_row_broadcast(
      tensor::matmul(agg, weights.w1), weights.b1));
  Var out =
      tensor::add_row_broadcast(tensor::matmul(hidden, weights.w2), weights.b2);
  return activate ? tensor::relu(out) : out;
}

Var encode(tensor::Tape &tape, const chem::MolecularGraph &graph,
           const GraphOperators &ops, const GnnConfig &config,
           tensor::ParameterStore &params, const std::string &prefix) {
  Var h = tensor::add_row_broadcast(
      tensor::matmul(tape.constant(graph.node_features),
                     tape.param(params.get(prefix + ".input.w"))),
      tape.param(params.get(prefix + ".input.b")));

  for (int l = 0; l < config.layers; ++l) {
    const std::string p = layer_prefix(prefix, l);
    const bool last = l + 1 == config.layers;
    switch (config.backbone) {
    case Backbone::kGCN:
      h = gcn_layer(h, ops.gcn_norm, tape.param(params.get(p + ".w")));
      break;
    case Backbone::kGAT: {
      std::vector<GatHead> heads;
      for (int k = 0; k < config.heads; ++k) {
        const std::string hp = p + ".head" + std::to_string(k);
        heads.push_back({ tape.param(params.get(hp + ".w")),
                          tape.param(params.get(hp + ".a_src")),
                          tape.param(params.get(hp + ".a_dst")) });
      }
      h = gat_layer(h, ops.neighbor_mask, heads, !last);
      break;
    }
    case Backbone::kGIN: {
      GinWeights w {
        config.gin_learn_eps ? tape.param(params.get(p + ".eps"))
                             : tape.constant(Matrix(1, 1)),
        tape.param(params.get(p + ".w1")),
        tape.param(params.get(p + ".b1")),
        tape.param(params.get(p + ".w2")),
        tape.param(params.get(p + ".b2")),
      };
      h = gin_layer(h, ops.adjacency, w, !last);
      break;
    }
    }
  }
  return h;
}

Var encode(tensor::Tape &tape, const chem::MolecularGraph &graph,
           const GnnConfig &config, tensor::ParameterStore &params,
           const std::string &prefix) {
  return encode(tape, graph, graph_operators(graph), config, params, prefix);
}

}  // namespace msan::gnn
