//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/synthetic.h"

#include <array>
#include <filesystem>
#include <fstream>
#include <span>
#include <string_view>

#include "msan/error.h"
#include "msan/random.h"

namespace msan::synthetic {
namespace {

constexpr int kClasses = 5;
constexpr int kDrugsPerClass = 4;

constexpr std::array<std::string_view, kClasses> kMotifs = {
  "C(=O)O",            // carboxylic acid
  "c1ccccc1",          // phenyl
  "[N+](=O)[O-]",      // nitro
  "C(F)(F)F",          // trifluoromethyl
  "S(=O)(=O)N",        // sulfonamide
};

// Scaffolds end on the attachment atom.
constexpr std::array<std::string_view, 10> kScaffolds = {
  "C", "CC", "CCC", "CC(C)", "OCC", "CCCC", "NCC", "C1CC1", "CC(O)C", "C1CCC1",
};

struct Rule {
  int a, b, type;
};

// 11 cross-class and 4 same-class entries: 11 * 16 + 4 * 6 = 200 pairs.
constexpr std::array<Rule, 15> kRules = { {
  { 0, 1, 0 }, { 2, 3, 0 }, { 1, 4, 0 }, { 0, 0, 0 },
  { 0, 2, 1 }, { 1, 3, 1 }, { 3, 4, 1 }, { 2, 2, 1 },
  { 0, 3, 2 }, { 2, 4, 2 }, { 1, 2, 2 }, { 4, 4, 2 },
  { 0, 4, 3 }, { 2, 3, 3 }, { 3, 3, 3 },
} };

}  // namespace

Dataset make_dataset(std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0x73796e7468ULL);
  Dataset ds;
  for (int c = 0; c < kClasses; ++c) {
    std::array<std::size_t, kScaffolds.size()> order {};
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = i;
    shuffle(std::span(order), rng);
    for (int k = 0; k < kDrugsPerClass; ++k) {
      const std::string id =
          "SYN" + std::to_string(c * kDrugsPerClass + k + 1);
      ds.drugs.emplace_back(id, std::string(kScaffolds[order[k]])
                                    + std::string(kMotifs[c]));
      ds.drug_class.push_back(c);
    }
  }

  const std::size_t n = ds.drugs.size();
  for (const Rule &rule: kRules) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const int ci = ds.drug_class[i], cj = ds.drug_class[j];
        if (!((ci == rule.a && cj == rule.b) || (ci == rule.b && cj == rule.a)))
          continue;
        const bool swap = bernoulli(rng, 0.5);
        const auto &d1 = ds.drugs[swap ? j : i].first;
        const auto &d2 = ds.drugs[swap ? i : j].first;
        ds.positives.push_back({ d1, d2, std::to_string(rule.type) });
      }
    }
  }
  return ds;
}

void write_dataset(const Dataset &dataset, const std::string &dir) {
  std::filesystem::create_directories(dir);
  std::ofstream drugs(std::filesystem::path(dir) / "drugs.csv");
  std::ofstream pairs(std::filesystem::path(dir) / "pairs.csv");
  if (!drugs || !pairs)
    throw Error(ErrorCode::kIoError, "cannot write dataset into " + dir);
  drugs << "drug_id,smiles\n";
  for (const auto &[id, smiles]: dataset.drugs)
    drugs << id << ',' << smiles << '\n';
  pairs << "drug1_id,drug2_id,ddi_type\n";
  for (const auto &p: dataset.positives)
    pairs << p.drug1 << ',' << p.drug2 << ',' << p.type << '\n';
}

}  // namespace msan::synthetic
