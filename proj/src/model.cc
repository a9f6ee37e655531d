//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/model.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "msan/error.h"

namespace msan::model {

using tensor::Var;

void ModelConfig::validate() const {
  gnn.validate();
  if (patterns < 1)
    throw Error(ErrorCode::kConfigError, "model.patterns must be >= 1");
  if (num_types < 1)
    throw Error(ErrorCode::kConfigError, "number of DDI types must be >= 1");
}

std::size_t ModelConfig::input_dim() const {
  return feature_dim == 0 ? chem::kFeatureDim : feature_dim;
}

std::size_t ModelConfig::head_input_dim() const {
  const auto d = static_cast<std::size_t>(gnn.dim);
  const auto m = static_cast<std::size_t>(patterns);
  const auto t = static_cast<std::size_t>(num_types);
  return 2 * d + (use_substructures ? m * m : 0) + t;
}

SeOutput se_extract(Var node_embeddings, const PatternWeights &w) {
  const std::size_t d = node_embeddings.cols();
  if (w.queries.cols() != d || w.w_k.rows() != d)
    throw Error(ErrorCode::kShapeMismatch,
                "se_extract: embedding width does not match pattern weights");
  Var q = tensor::matmul(w.queries, w.w_q);
  Var k = tensor::matmul(node_embeddings, w.w_k);
  Var v = tensor::matmul(node_embeddings, w.w_v);
  Var scores = tensor::scale(tensor::matmul(q, tensor::transpose(k)),
                             1.0 / std::sqrt(static_cast<double>(d)));
  Var attn = tensor::row_softmax(scores);
  Var reps = tensor::relu(
      tensor::matmul(tensor::add(q, tensor::matmul(attn, v)), w.w_o));
  return { reps, attn };
}

std::vector<std::size_t> AtomAssignment::used_patterns() const {
  std::vector<std::size_t> used(pattern_of_atom);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  return used;
}

AtomAssignment assign_atoms(const Matrix &attn) {
  AtomAssignment out;
  out.pattern_of_atom.resize(attn.cols(), 0);
  for (std::size_t j = 0; j < attn.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < attn.rows(); ++i)
      if (attn(i, j) > attn(best, j))
        best = i;
    out.pattern_of_atom[j] = best;
  }
  return out;
}

std::size_t pick_substructure(const AtomAssignment &assignment, Rng &rng) {
  const auto used = assignment.used_patterns();
  if (used.empty())
    throw Error(ErrorCode::kShapeMismatch, "assignment covers no atoms");
  return used[uniform_index(rng, used.size())];
}

chem::MolecularGraph drop_substructure(const chem::MolecularGraph &graph,
                                       const AtomAssignment &assignment,
                                       std::size_t pattern) {
  if (assignment.pattern_of_atom.size() != graph.num_atoms())
    throw Error(ErrorCode::kShapeMismatch,
                "assignment length does not match atom count");
  chem::MolecularGraph out = graph;
  for (std::size_t a = 0; a < graph.num_atoms(); ++a) {
    if (assignment.pattern_of_atom[a] != pattern)
      continue;
    for (double &v: out.node_features.row(a))
      v = 0.0;
  }
  return out;
}

chem::MolecularGraph sd_augment(const chem::MolecularGraph &graph,
                                const AtomAssignment &assignment, Rng &rng) {
  return drop_substructure(graph, assignment,
                           pick_substructure(assignment, rng));
}

Var si_similarity(Var reps1, Var reps2) {
  if (reps1.cols() != reps2.cols())
    throw Error(ErrorCode::kShapeMismatch,
                "si_similarity: representative widths differ");
  Var s = tensor::matmul(tensor::row_normalize(reps1),
                         tensor::transpose(tensor::row_normalize(reps2)));
  return tensor::clamp(s, -1.0, 1.0);
}

Var readout(Var node_embeddings) {
  return tensor::sum_rows(node_embeddings);
}

Var predict_logit(Var g1, Var g2, std::optional<Var> similarity,
                  Var type_one_hot, const HeadWeights &head) {
  std::vector<Var> parts { g1, g2 };
  if (similarity)
    parts.push_back(tensor::flatten(*similarity));
  parts.push_back(type_one_hot);
  Var x = tensor::concat_cols(parts);
  if (x.cols() != head.w1.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "predict_logit: head expects " + std::to_string(head.w1.rows())
                    + " inputs, got " + std::to_string(x.cols()));
  Var hidden = tensor::relu(
      tensor::add_row_broadcast(tensor::matmul(x, head.w1), head.b1));
  return tensor::add_row_broadcast(tensor::matmul(hidden, head.w2), head.b2);
}

Matrix one_hot_type(int type, int num_types) {
  if (type < 0 || type >= num_types)
    throw Error(ErrorCode::kShapeMismatch,
                "DDI type " + std::to_string(type) + " outside [0, "
                    + std::to_string(num_types) + ")");
  Matrix t(1, static_cast<std::size_t>(num_types));
  t(0, static_cast<std::size_t>(type)) = 1.0;
  return t;
}

MsanModel::MsanModel(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  Rng rng = derive_rng(seed, 0x6d6f64656cULL);
  const auto d = static_cast<std::size_t>(config_.gnn.dim);
  const auto m = static_cast<std::size_t>(config_.patterns);

  gnn::register_params(params_, config_.gnn, config_.input_dim(), rng);
  if (config_.use_substructures) {
    params_.add("se.queries", tensor::xavier_uniform(m, d, rng));
    params_.add("se.w_q", tensor::xavier_uniform(d, d, rng));
    params_.add("se.w_k", tensor::xavier_uniform(d, d, rng));
    params_.add("se.w_v", tensor::xavier_uniform(d, d, rng));
    params_.add("se.w_o", tensor::xavier_uniform(d, d, rng));
  }
  const std::size_t in = config_.head_input_dim();
  params_.add("head.w1", tensor::xavier_uniform(in, 2 * d, rng));
  params_.add("head.b1", Matrix(1, 2 * d));
  params_.add("head.w2", tensor::xavier_uniform(2 * d, 1, rng));
  params_.add("head.b2", Matrix(1, 1));
}

PatternWeights MsanModel::pattern_weights(tensor::Tape &tape) {
  return {
    tape.param(params_.get("se.queries")),
    tape.param(params_.get("se.w_q")),
    tape.param(params_.get("se.w_k")),
    tape.param(params_.get("se.w_v")),
    tape.param(params_.get("se.w_o")),
  };
}

HeadWeights MsanModel::head_weights(tensor::Tape &tape) {
  return {
    tape.param(params_.get("head.w1")),
    tape.param(params_.get("head.b1")),
    tape.param(params_.get("head.w2")),
    tape.param(params_.get("head.b2")),
  };
}

DrugEncoding MsanModel::encode_drug(tensor::Tape &tape,
                                    const chem::MolecularGraph &graph) {
  if (graph.node_features.cols() != config_.input_dim())
    throw Error(ErrorCode::kShapeMismatch,
                "graph feature width does not match the model input");
  DrugEncoding enc;
  enc.nodes = gnn::encode(tape, graph, config_.gnn, params_);
  enc.graph = readout(enc.nodes);
  if (config_.use_substructures)
    enc.se = se_extract(enc.nodes, pattern_weights(tape));
  return enc;
}

AtomAssignment MsanModel::assignment_for(const chem::MolecularGraph &graph) {
  if (!config_.use_substructures)
    throw Error(ErrorCode::kConfigError,
                "atom assignment needs the substructure modules");
  tensor::Tape tape(tensor::Tape::GradMode::kDisabled);
  Var nodes = gnn::encode(tape, graph, config_.gnn, params_);
  return assign_atoms(se_extract(nodes, pattern_weights(tape)).attn.value());
}

Var MsanModel::logit_from(tensor::Tape &tape, const DrugEncoding &d1,
                          const DrugEncoding &d2, int type) {
  std::optional<Var> similarity;
  if (config_.use_substructures)
    similarity = si_similarity(d1.se->reps, d2.se->reps);
  return predict_logit(d1.graph, d2.graph, similarity,
                       tape.constant(one_hot_type(type, config_.num_types)),
                       head_weights(tape));
}

Var MsanModel::forward_pair(tensor::Tape &tape,
                            const chem::MolecularGraph &drug1,
                            const chem::MolecularGraph &drug2, int type,
                            Mode mode, Rng *rng, ForwardTrace *trace) {
  const chem::MolecularGraph *inputs[2] = { &drug1, &drug2 };
  chem::MolecularGraph augmented[2];
  if (mode == Mode::kTrain && config_.use_substructures) {
    if (rng == nullptr)
      throw Error(ErrorCode::kConfigError, "training forward needs an RNG");
    for (int k = 0; k < 2; ++k) {
      if (!bernoulli(*rng, kAugmentProbability))
        continue;
      const AtomAssignment assignment = assignment_for(*inputs[k]);
      const std::size_t pattern = pick_substructure(assignment, *rng);
      augmented[k] = drop_substructure(*inputs[k], assignment, pattern);
      inputs[k] = &augmented[k];
      if (trace != nullptr) {
        trace->augmented[k] = true;
        trace->dropped_pattern[k] = pattern;
      }
    }
  }
  const DrugEncoding e1 = encode_drug(tape, *inputs[0]);
  const DrugEncoding e2 = encode_drug(tape, *inputs[1]);
  return logit_from(tape, e1, e2, type);
}

double MsanModel::logit(const chem::MolecularGraph &drug1,
                        const chem::MolecularGraph &drug2, int type) {
  tensor::Tape tape(tensor::Tape::GradMode::kDisabled);
  return forward_pair(tape, drug1, drug2, type, Mode::kEval).scalar();
}

}  // namespace msan::model
