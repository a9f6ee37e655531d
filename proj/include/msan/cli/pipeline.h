//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_CLI_PIPELINE_H_
#define MSAN_CLI_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "msan/cli/config.h"
#include "msan/data.h"
#include "msan/fingerprint.h"
#include "msan/matrix.h"
#include "msan/model.h"

namespace msan::cli {

struct Dataset {
  data::DrugTable drugs;
  data::TypeVocab types;
  std::vector<data::DdiSample> positives;
  std::vector<data::DdiSample> negatives;

  // Positives followed by negatives.
  std::vector<data::DdiSample> all() const;
};

// Negatives are drawn from `seed`, so every fold sees its own set.
Dataset build_dataset(data::DrugTable drugs, data::PairData pairs,
                      std::uint64_t seed);
Dataset load_dataset(const RunConfig &config);

struct Partition {
  bool inductive = false;
  std::vector<data::DdiSample> train, valid, test;
  std::vector<data::DdiSample> s1, s2;  // inductive only
  std::vector<bool> is_new;             // inductive only

  // "train", "valid", "test" (transductive) or "train", "valid", "s1", "s2"
  // (inductive). ConfigError otherwise.
  const std::vector<data::DdiSample> &bucket(std::string_view name) const;
  std::vector<std::string_view> bucket_names() const;
};

// Transductive: 6:2:2 stratified split. Inductive: drug-level split; the
// validation set is a stratified 10% carve-out of the all-old pairs.
Partition make_partition(const Dataset &dataset, bool inductive,
                         std::uint64_t seed);

// Per (type, label) stratum, round(fraction * n) samples move to `held`.
void carve_stratified(std::span<const data::DdiSample> samples,
                      double fraction, std::uint64_t seed,
                      std::vector<data::DdiSample> &kept,
                      std::vector<data::DdiSample> &held);

model::ModelConfig model_config(const RunConfig &config, std::size_t num_types);

// Eval-mode scoring with per-drug encodings computed once.
class Scorer {
public:
  Scorer(model::MsanModel &model, const data::DrugTable &drugs);

  double logit(std::size_t drug1, std::size_t drug2, int type);
  double probability(std::size_t drug1, std::size_t drug2, int type);
  // Similarity matrix S of a pair; requires the substructure modules.
  Matrix similarity(std::size_t drug1, std::size_t drug2);

private:
  struct Encoded {
    Matrix graph;
    Matrix reps;
  };
  const Encoded &encoded(std::size_t drug);

  model::MsanModel &model_;
  const data::DrugTable &drugs_;
  std::vector<std::optional<Encoded>> cache_;
};

// Probabilities for `samples` in order.
std::vector<double> score_samples(Scorer &scorer,
                                  std::span<const data::DdiSample> samples);

// Inductive scores: every drug is paired with its nearest old drug.
std::vector<double>
score_inductive(Scorer &scorer, const data::DrugTable &drugs,
                const std::vector<fingerprint::Fingerprint> &fps,
                const std::vector<bool> &is_new,
                std::span<const data::DdiSample> samples);

std::vector<fingerprint::Fingerprint>
drug_fingerprints(const data::DrugTable &drugs, int radius, std::size_t width);

data::Metrics evaluate(Scorer &scorer,
                       std::span<const data::DdiSample> samples);

struct EpochLog {
  int epoch = 0;  // 0-based
  double lr = 0.0;
  double loss = 0.0;  // mean BCE over the epoch's samples
  data::Metrics valid;
};

using EpochHook = std::function<void(const EpochLog &, model::MsanModel &)>;

// Mini-batch Adam on BCE. Training mode draws the substructure-drop
// augmentation unless `config.augment` is false. Each batch encodes every
// distinct (drug, dropped pattern) once. `hook` runs after every epoch.
void train_model(model::MsanModel &model, const data::DrugTable &drugs,
                 std::span<const data::DdiSample> train,
                 std::span<const data::DdiSample> valid,
                 const RunConfig &config, const EpochHook &hook);

}  // namespace msan::cli

#endif  // MSAN_CLI_PIPELINE_H_
