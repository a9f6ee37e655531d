//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_CHEM_H_
#define MSAN_CHEM_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msan/matrix.h"

namespace msan::chem {

enum class BondOrder { kSingle = 1, kDouble = 2, kTriple = 3, kQuadruple = 4, kAromatic = 5 };

enum class Hybridization { kS, kSP, kSP2, kSP3, kSP3D, kSP3D2, kOther };

enum class Chirality { kNone, kClockwise, kCounterClockwise, kOther };

struct AtomMeta {
  std::string element;  // capitalized symbol, e.g. "C", "Cl"
  int degree = 0;       // heavy-atom neighbors
  int formal_charge = 0;
  int h_count = 0;  // implicit + explicit + folded [H] atoms
  Hybridization hybridization = Hybridization::kOther;
  bool aromatic = false;
  bool in_ring = false;
  Chirality chirality = Chirality::kNone;

  friend bool operator==(const AtomMeta &, const AtomMeta &) = default;
};

struct Bond {
  std::size_t begin;
  std::size_t end;
  BondOrder order;

  friend bool operator==(const Bond &, const Bond &) = default;
};

// Heavy-atom molecular graph. `node_features` is the one-hot matrix X
// (num_atoms x kFeatureDim); `bonds` is the undirected adjacency A.
struct MolecularGraph {
  std::vector<AtomMeta> atoms;
  std::vector<Bond> bonds;
  Matrix node_features;

  std::size_t num_atoms() const { return atoms.size(); }

  // Adjacency lists, neighbors in bond order.
  std::vector<std::vector<std::size_t>> neighbors() const;
};

// Per-attribute vocabulary sizes, each including a trailing "other" slot.
// Order: element, degree, formal charge, H count, hybridization, aromatic,
// ring membership, chirality.
inline constexpr std::size_t kNumAttributes = 8;
extern const std::array<std::size_t, kNumAttributes> kAttributeSizes;
extern const std::size_t kFeatureDim;

// Parses the supported SMILES subset. Hydrogens are folded into the
// H-count attribute of their heavy neighbor; features are populated.
MolecularGraph parse_smiles(std::string_view smiles);

// One row per atom: the concatenation of the 8 one-hot attribute blocks.
// Values outside a vocabulary land in that block's "other" slot.
Matrix featurize(const MolecularGraph &graph);

// Column offset of each attribute block inside a feature row.
std::array<std::size_t, kNumAttributes> attribute_offsets();

// Graph whose atom i is atom order[i] of the input; bonds are remapped.
// `order` must be a permutation of [0, num_atoms).
MolecularGraph permute_atoms(const MolecularGraph &graph,
                             std::span<const std::size_t> order);

}  // namespace msan::chem

#endif  // MSAN_CHEM_H_
