//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_DATA_H_
#define MSAN_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "msan/chem.h"

namespace msan::data {

struct Drug {
  std::string id;
  std::string smiles;
  chem::MolecularGraph graph;
};

// Drug vocabulary in file order. SMILES are parsed eagerly.
class DrugTable {
public:
  // CSV with header `drug_id,smiles`. Parse errors name path and line.
  static DrugTable load(const std::filesystem::path &path);
  static DrugTable
  from_entries(const std::vector<std::pair<std::string, std::string>> &rows);

  std::size_t size() const { return drugs_.size(); }
  const Drug &operator[](std::size_t i) const { return drugs_[i]; }

  std::optional<std::size_t> find(std::string_view id) const;
  // Throws UnknownDrugId naming the id.
  std::size_t index_of(std::string_view id) const;

private:
  void add(std::string id, std::string smiles, const std::string &where);

  std::vector<Drug> drugs_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Raw DDI type labels mapped to dense ids. Labels are ordered numerically
// when all of them are integers, lexicographically otherwise.
class TypeVocab {
public:
  TypeVocab() = default;
  explicit TypeVocab(std::vector<std::string> labels);

  static TypeVocab build(std::vector<std::string> raw_labels);

  std::size_t size() const { return labels_.size(); }
  const std::string &label(std::size_t id) const { return labels_[id]; }
  const std::vector<std::string> &labels() const { return labels_; }
  std::optional<int> find(std::string_view label) const;

  friend bool operator==(const TypeVocab &a, const TypeVocab &b) {
    return a.labels_ == b.labels_;
  }

private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

// (drug1, drug2, type, label); drugs are DrugTable indices.
struct DdiSample {
  std::size_t drug1 = 0;
  std::size_t drug2 = 0;
  int type = 0;
  int label = 1;

  friend bool operator==(const DdiSample &, const DdiSample &) = default;
};

struct PairData {
  std::vector<DdiSample> positives;
  TypeVocab types;
};

// CSV with header `drug1_id,drug2_id,ddi_type`; every row is a positive.
PairData load_pairs(const std::filesystem::path &path, const DrugTable &drugs);

// One negative per positive: one endpoint (coin flip) is replaced by a
// uniform random drug so that the unordered pair is not a positive of the
// same type and is not a self pair. 100 attempts per endpoint, then the
// other endpoint; SamplingExhausted if both fail.
std::vector<DdiSample> sample_negatives(std::span<const DdiSample> positives,
                                        std::size_t num_drugs,
                                        std::uint64_t seed);

struct TransductiveSplit {
  std::vector<DdiSample> train, valid, test;
};

// Per (type, label) stratum: seeded shuffle, then round(0.2 n) to valid,
// round(0.2 n) to test, the rest to train.
TransductiveSplit split_transductive(std::span<const DdiSample> samples,
                                     std::uint64_t seed);

struct InductiveSplit {
  std::vector<bool> is_new;  // per drug index
  std::vector<DdiSample> train;  // both drugs old
  std::vector<DdiSample> s1;     // both drugs new
  std::vector<DdiSample> s2;     // exactly one drug new
};

// Seeded drug shuffle; the first round(0.2 n) drugs are new.
InductiveSplit split_inductive(std::size_t num_drugs,
                               std::span<const DdiSample> samples,
                               std::uint64_t seed);

struct Metrics {
  std::size_t count = 0;
  double accuracy = 0.0;
  std::optional<double> auc;  // absent when only one class is present
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Threshold 0.5 (score >= 0.5 is positive) for ACC/P/R/F1; AUC is the
// Mann-Whitney statistic with half credit for tied scores.
Metrics compute_metrics(std::span<const double> scores,
                        std::span<const int> labels);

// Unordered key of a (pair, type) triple.
std::uint64_t pair_key(std::size_t a, std::size_t b, int type);

// Minimal CSV: comma-separated, no quoting, surrounding blanks trimmed.
struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};
std::vector<CsvRow> read_csv(const std::filesystem::path &path,
                             std::span<const std::string_view> header);

}  // namespace msan::data

#endif  // MSAN_DATA_H_
