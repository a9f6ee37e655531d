//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/cli/pipeline.h"

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "msan/error.h"
#include "msan/random.h"
#include "msan/tensor.h"

namespace msan::cli {
namespace {

constexpr std::uint64_t kNegativeStream = 0x6e6567ULL;
constexpr std::uint64_t kTrainStream = 0x747261696eULL;
constexpr std::uint64_t kCarveStream = 0x6361727665ULL;

}  // namespace

std::vector<data::DdiSample> Dataset::all() const {
  std::vector<data::DdiSample> out(positives);
  out.insert(out.end(), negatives.begin(), negatives.end());
  return out;
}

Dataset build_dataset(data::DrugTable drugs, data::PairData pairs,
                      std::uint64_t seed) {
  Dataset ds { std::move(drugs), std::move(pairs.types),
               std::move(pairs.positives), {} };
  ds.negatives = data::sample_negatives(ds.positives, ds.drugs.size(),
                                        seed ^ kNegativeStream);
  return ds;
}

Dataset load_dataset(const RunConfig &config) {
  data::DrugTable drugs = data::DrugTable::load(config.drugs);
  data::PairData pairs = data::load_pairs(config.pairs, drugs);
  return build_dataset(std::move(drugs), std::move(pairs),
                       config.effective_seed());
}

const std::vector<data::DdiSample> &
Partition::bucket(std::string_view name) const {
  if (name == "train")
    return train;
  if (name == "valid")
    return valid;
  if (!inductive && name == "test")
    return test;
  if (inductive && name == "s1")
    return s1;
  if (inductive && name == "s2")
    return s2;
  throw Error(ErrorCode::kConfigError,
              "unknown split '" + std::string(name) + "' for "
                  + (inductive ? "inductive" : "transductive") + " mode");
}

std::vector<std::string_view> Partition::bucket_names() const {
  if (inductive)
    return { "train", "valid", "s1", "s2" };
  return { "train", "valid", "test" };
}

void carve_stratified(std::span<const data::DdiSample> samples,
                      double fraction, std::uint64_t seed,
                      std::vector<data::DdiSample> &kept,
                      std::vector<data::DdiSample> &held) {
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < samples.size(); ++i)
    strata[{ samples[i].type, samples[i].label }].push_back(i);
  Rng rng = derive_rng(seed, kCarveStream);
  for (auto &[key, members]: strata) {
    shuffle(std::span(members), rng);
    const auto n_held = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < members.size(); ++k)
      (k < n_held ? held : kept).push_back(samples[members[k]]);
  }
}

Partition make_partition(const Dataset &dataset, bool inductive,
                         std::uint64_t seed) {
  const auto samples = dataset.all();
  Partition p;
  p.inductive = inductive;
  if (!inductive) {
    auto split = data::split_transductive(samples, seed);
    p.train = std::move(split.train);
    p.valid = std::move(split.valid);
    p.test = std::move(split.test);
    return p;
  }
  auto split = data::split_inductive(dataset.drugs.size(), samples, seed);
  carve_stratified(split.train, 0.1, seed, p.train, p.valid);
  p.s1 = std::move(split.s1);
  p.s2 = std::move(split.s2);
  p.is_new = std::move(split.is_new);
  return p;
}

model::ModelConfig model_config(const RunConfig &config,
                                std::size_t num_types) {
  model::ModelConfig mc;
  mc.gnn = config.gnn;
  mc.patterns = config.patterns;
  mc.num_types = static_cast<int>(num_types);
  mc.use_substructures = config.use_substructures;
  return mc;
}

Scorer::Scorer(model::MsanModel &model, const data::DrugTable &drugs)
    : model_(model), drugs_(drugs), cache_(drugs.size()) { }

const Scorer::Encoded &Scorer::encoded(std::size_t drug) {
  auto &slot = cache_.at(drug);
  if (!slot) {
    tensor::Tape tape(tensor::Tape::GradMode::kDisabled);
    const auto enc = model_.encode_drug(tape, drugs_[drug].graph);
    slot = Encoded { enc.graph.value(),
                     enc.se ? enc.se->reps.value() : Matrix() };
  }
  return *slot;
}

double Scorer::logit(std::size_t drug1, std::size_t drug2, int type) {
  const Encoded &e1 = encoded(drug1);
  const Encoded &e2 = encoded(drug2);
  tensor::Tape tape(tensor::Tape::GradMode::kDisabled);
  std::optional<tensor::Var> sim;
  if (model_.config().use_substructures)
    sim = model::si_similarity(tape.constant(e1.reps), tape.constant(e2.reps));
  return model::predict_logit(
             tape.constant(e1.graph), tape.constant(e2.graph), sim,
             tape.constant(model::one_hot_type(type, model_.config().num_types)),
             model_.head_weights(tape))
      .scalar();
}

double Scorer::probability(std::size_t drug1, std::size_t drug2, int type) {
  return tensor::sigmoid(logit(drug1, drug2, type));
}

Matrix Scorer::similarity(std::size_t drug1, std::size_t drug2) {
  if (!model_.config().use_substructures)
    throw Error(ErrorCode::kConfigError,
                "model was trained without substructure modules");
  const Encoded &e1 = encoded(drug1);
  const Encoded &e2 = encoded(drug2);
  tensor::Tape tape(tensor::Tape::GradMode::kDisabled);
  return model::si_similarity(tape.constant(e1.reps), tape.constant(e2.reps))
      .value();
}

std::vector<double> score_samples(Scorer &scorer,
                                  std::span<const data::DdiSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto &s: samples)
    out.push_back(scorer.probability(s.drug1, s.drug2, s.type));
  return out;
}

std::vector<fingerprint::Fingerprint>
drug_fingerprints(const data::DrugTable &drugs, int radius, std::size_t width) {
  std::vector<fingerprint::Fingerprint> fps;
  fps.reserve(drugs.size());
  for (std::size_t i = 0; i < drugs.size(); ++i)
    fps.push_back(fingerprint::ecfp(drugs[i].graph, radius, width));
  return fps;
}

std::vector<double>
score_inductive(Scorer &scorer, const data::DrugTable &drugs,
                const std::vector<fingerprint::Fingerprint> &fps,
                const std::vector<bool> &is_new,
                std::span<const data::DdiSample> samples) {
  std::vector<fingerprint::PoolEntry> pool;
  for (std::size_t i = 0; i < drugs.size(); ++i)
    if (!is_new[i])
      pool.push_back({ drugs[i].id, fps[i] });
  const fingerprint::LogitFn logit = [&](const std::string &a,
                                         const std::string &b, int type) {
    return scorer.logit(drugs.index_of(a), drugs.index_of(b), type);
  };
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto &s: samples)
    out.push_back(fingerprint::inductive_score(
        drugs[s.drug1].id, fps[s.drug1], drugs[s.drug2].id, fps[s.drug2],
        s.type, pool, logit));
  return out;
}

data::Metrics evaluate(Scorer &scorer,
                       std::span<const data::DdiSample> samples) {
  const auto scores = score_samples(scorer, samples);
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const auto &s: samples)
    labels.push_back(s.label);
  return data::compute_metrics(scores, labels);
}

void train_model(model::MsanModel &model, const data::DrugTable &drugs,
                 std::span<const data::DdiSample> train,
                 std::span<const data::DdiSample> valid,
                 const RunConfig &config, const EpochHook &hook) {
  if (train.empty())
    throw Error(ErrorCode::kEmptyBatch, "training set is empty");
  std::vector<data::DdiSample> order(train.begin(), train.end());
  if (config.both_orderings)
    for (const auto &s: train)
      order.push_back({ s.drug2, s.drug1, s.type, s.label });

  Rng rng = derive_rng(config.effective_seed(), kTrainStream);
  tensor::Adam adam(model.params());
  const bool augment = config.augment && model.config().use_substructures;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr_at(epoch);
    shuffle(std::span(order), rng);
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      tensor::Tape tape;
      std::map<std::pair<std::size_t, long>, model::DrugEncoding> encodings;
      std::map<std::size_t, model::AtomAssignment> assignments;
      auto encode = [&](std::size_t drug, long dropped) {
        auto it = encodings.find({ drug, dropped });
        if (it != encodings.end())
          return it->second;
        const auto &graph = drugs[drug].graph;
        model::DrugEncoding enc =
            dropped < 0
                ? model.encode_drug(tape, graph)
                : model.encode_drug(
                      tape, model::drop_substructure(
                                graph, assignments.at(drug),
                                static_cast<std::size_t>(dropped)));
        encodings.emplace(std::make_pair(drug, dropped), enc);
        return enc;
      };

      std::vector<tensor::Var> logits;
      std::vector<double> labels;
      for (std::size_t k = start; k < end; ++k) {
        const auto &s = order[k];
        const std::size_t ids[2] = { s.drug1, s.drug2 };
        long dropped[2] = { -1, -1 };
        if (augment) {
          for (int side = 0; side < 2; ++side) {
            if (!bernoulli(rng, model::kAugmentProbability))
              continue;
            auto it = assignments.find(ids[side]);
            if (it == assignments.end())
              it = assignments
                       .emplace(ids[side],
                                model.assignment_for(drugs[ids[side]].graph))
                       .first;
            dropped[side] =
                static_cast<long>(model::pick_substructure(it->second, rng));
          }
        }
        const auto e1 = encode(ids[0], dropped[0]);
        const auto e2 = encode(ids[1], dropped[1]);
        logits.push_back(model.logit_from(tape, e1, e2, s.type));
        labels.push_back(static_cast<double>(s.label));
      }

      tensor::Var loss =
          tensor::bce_with_logits(tensor::concat_rows(logits), labels);
      loss_sum += loss.scalar() * static_cast<double>(end - start);
      model.params().zero_grad();
      tape.backward(loss);
      adam.step(lr);
    }

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.loss = loss_sum / static_cast<double>(order.size());
    if (!valid.empty()) {
      Scorer scorer(model, drugs);
      log.valid = evaluate(scorer, valid);
    }
    if (hook)
      hook(log, model);
  }
}

}  // namespace msan::cli
