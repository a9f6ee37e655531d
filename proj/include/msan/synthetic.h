//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_SYNTHETIC_H_
#define MSAN_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace msan::synthetic {

struct PositivePair {
  std::string drug1;
  std::string drug2;
  std::string type;
};

// Procedurally generated DDI benchmark with a planted rule. Each of the
// 20 molecules carries one of five functional-group motifs (its class) on
// a small varying scaffold. A (drug pair, type) is positive iff the
// unordered class pair belongs to that type's rule set; the rule sets
// are sized so that exactly 200 unordered triples qualify, all of which
// are returned. Four DDI types.
struct Dataset {
  std::vector<std::pair<std::string, std::string>> drugs;  // id, SMILES
  std::vector<int> drug_class;
  std::vector<PositivePair> positives;
};

Dataset make_dataset(std::uint64_t seed);

// Writes drugs.csv and pairs.csv into `dir`.
void write_dataset(const Dataset &dataset, const std::string &dir);

}  // namespace msan::synthetic

#endif  // MSAN_SYNTHETIC_H_
