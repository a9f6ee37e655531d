//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "msan/chem.h"
#include "msan/error.h"
#include "test_util.h"

namespace msan::chem {
namespace {

ErrorCode parse_error(const std::string &smiles) {
  try {
    parse_smiles(smiles);
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << smiles;
  return ErrorCode::kConfigError;
}

std::size_t block_slot(const Matrix &x, std::size_t row, std::size_t block) {
  const auto offsets = attribute_offsets();
  for (std::size_t k = 0; k < kAttributeSizes[block]; ++k)
    if (x(row, offsets[block] + k) == 1.0)
      return k;
  return kAttributeSizes[block];
}

TEST(ParseSmiles, Methane) {
  const auto g = parse_smiles("C");
  EXPECT_EQ(g.num_atoms(), 1);
  EXPECT_TRUE(g.bonds.empty());
  EXPECT_EQ(g.atoms[0].h_count, 4);
}

TEST(ParseSmiles, RingClosureAddsBond) {
  const auto g = parse_smiles("C1CC1");
  EXPECT_EQ(g.num_atoms(), 3);
  EXPECT_EQ(g.bonds.size(), 3);
  for (const auto &a: g.atoms) {
    EXPECT_TRUE(a.in_ring);
    EXPECT_EQ(a.h_count, 2);
  }
}

TEST(ParseSmiles, AromaticBenzene) {
  const auto g = parse_smiles("c1ccccc1");
  EXPECT_EQ(g.num_atoms(), 6);
  EXPECT_EQ(g.bonds.size(), 6);
  for (const auto &a: g.atoms) {
    EXPECT_TRUE(a.aromatic);
    EXPECT_TRUE(a.in_ring);
    EXPECT_EQ(a.h_count, 1);
    EXPECT_EQ(a.hybridization, Hybridization::kSP2);
  }
  for (const auto &b: g.bonds)
    EXPECT_EQ(b.order, BondOrder::kAromatic);
}

TEST(ParseSmiles, Errors) {
  EXPECT_EQ(parse_error("C1CC"), ErrorCode::kUnmatchedRingBond);
  EXPECT_EQ(parse_error(""), ErrorCode::kEmptyInput);
  EXPECT_EQ(parse_error("C(C"), ErrorCode::kUnbalancedParen);
  EXPECT_EQ(parse_error("CC)C"), ErrorCode::kUnbalancedParen);
  EXPECT_EQ(parse_error("CQ"), ErrorCode::kUnknownAtomSymbol);
  EXPECT_EQ(parse_error("[Xx]"), ErrorCode::kUnknownAtomSymbol);
  EXPECT_EQ(parse_error("C%1C"), ErrorCode::kSyntaxError);
  EXPECT_EQ(parse_error("C11"), ErrorCode::kSyntaxError);
  EXPECT_EQ(parse_error("C12CC12"), ErrorCode::kSyntaxError);
  EXPECT_EQ(parse_error("[CH4"), ErrorCode::kSyntaxError);
}

TEST(ParseSmiles, ErrorMessageNamesPosition) {
  try {
    parse_smiles("CC(C");
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("CC(C"), std::string::npos);
  }
}


TEST(ParseSmiles, HeavyAtomCorpus) {
  for (const auto &entry: msan::testing::heavy_atom_corpus()) {
    SCOPED_TRACE(entry.name);
    const auto g = parse_smiles(entry.smiles);
    EXPECT_EQ(g.num_atoms(), entry.heavy_atoms);
    EXPECT_EQ(g.node_features.rows(), entry.heavy_atoms);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto &b: g.bonds) {
      EXPECT_LT(b.begin, g.num_atoms());
      EXPECT_LT(b.end, g.num_atoms());
      EXPECT_NE(b.begin, b.end);
      EXPECT_TRUE(
          seen.insert({ std::min(b.begin, b.end), std::max(b.begin, b.end) })
              .second);
    }
  }
}

TEST(ParseSmiles, BondCounts) {
  EXPECT_EQ(parse_smiles("C12C3C4C1C5C2C3C45").bonds.size(), 12);
  EXPECT_EQ(parse_smiles("C1C2CC3CC1CC(C2)C3").bonds.size(), 12);
  EXPECT_EQ(parse_smiles("c1ccc2ccccc2c1").bonds.size(), 11);
  EXPECT_EQ(parse_smiles("[Na+].[Cl-]").bonds.size(), 0);
}

TEST(ParseSmiles, HydrogenCounts) {
  const auto ethanol = parse_smiles("CCO");
  EXPECT_EQ(ethanol.atoms[0].h_count, 3);
  EXPECT_EQ(ethanol.atoms[1].h_count, 2);
  EXPECT_EQ(ethanol.atoms[2].h_count, 1);

  EXPECT_EQ(parse_smiles("[H]C([H])([H])[H]").atoms[0].h_count, 4);
  EXPECT_EQ(parse_smiles("[2H]C").atoms[0].h_count, 4);

  const auto pyrrole = parse_smiles("c1cc[nH]c1");
  EXPECT_EQ(pyrrole.atoms[3].element, "N");
  EXPECT_EQ(pyrrole.atoms[3].h_count, 1);
  const auto pyridine = parse_smiles("c1ccncc1");
  EXPECT_EQ(pyridine.atoms[3].h_count, 0);

  // Fusion carbons of naphthalene carry no hydrogen.
  const auto naph = parse_smiles("c1ccc2ccccc2c1");
  EXPECT_EQ(naph.atoms[3].h_count, 0);
  EXPECT_EQ(naph.atoms[8].h_count, 0);
  EXPECT_EQ(naph.atoms[0].h_count, 1);

  const auto sulfone = parse_smiles("CS(=O)(=O)C");
  EXPECT_EQ(sulfone.atoms[1].h_count, 0);
  EXPECT_EQ(parse_smiles("CC#N").atoms[2].h_count, 0);
}

TEST(ParseSmiles, BracketAtoms) {
  const auto ammonium = parse_smiles("[NH4+]");
  EXPECT_EQ(ammonium.atoms[0].formal_charge, 1);
  EXPECT_EQ(ammonium.atoms[0].h_count, 4);

  const auto salt = parse_smiles("[Na+].[Cl-]");
  EXPECT_EQ(salt.atoms[0].element, "Na");
  EXPECT_EQ(salt.atoms[0].formal_charge, 1);
  EXPECT_EQ(salt.atoms[1].element, "Cl");
  EXPECT_EQ(salt.atoms[1].formal_charge, -1);
  EXPECT_EQ(salt.atoms[1].h_count, 0);

  EXPECT_EQ(parse_smiles("[Fe++]").atoms[0].formal_charge, 2);
  EXPECT_EQ(parse_smiles("[O-2]").atoms[0].formal_charge, -2);
  EXPECT_EQ(parse_smiles("[13CH3:7]C").atoms[0].h_count, 3);

  const auto se = parse_smiles("c1cc[se]c1");
  EXPECT_EQ(se.atoms[3].element, "Se");
  EXPECT_TRUE(se.atoms[3].aromatic);
}

TEST(ParseSmiles, Chirality) {
  EXPECT_EQ(parse_smiles("C[C@@H](N)C(=O)O").atoms[1].chirality,
            Chirality::kClockwise);
  EXPECT_EQ(parse_smiles("C[C@H](N)C(=O)O").atoms[1].chirality,
            Chirality::kCounterClockwise);
  EXPECT_EQ(parse_smiles("CC(N)C(=O)O").atoms[1].chirality, Chirality::kNone);
}

TEST(ParseSmiles, RingMembership) {
  const auto toluene = parse_smiles("Cc1ccccc1");
  EXPECT_FALSE(toluene.atoms[0].in_ring);
  for (std::size_t i = 1; i < 7; ++i)
    EXPECT_TRUE(toluene.atoms[i].in_ring);
  for (const auto &a: parse_smiles("C1C2CC3CC1CC(C2)C3").atoms)
    EXPECT_TRUE(a.in_ring);
  const auto biphenyl = parse_smiles("c1ccccc1-c1ccccc1");
  for (const auto &a: biphenyl.atoms)
    EXPECT_TRUE(a.in_ring);
  const auto bridge = std::find_if(
      biphenyl.bonds.begin(), biphenyl.bonds.end(),
      [](const Bond &b) { return b.begin == 5 && b.end == 6; });
  ASSERT_NE(bridge, biphenyl.bonds.end());
  EXPECT_EQ(bridge->order, BondOrder::kSingle);
}

TEST(ParseSmiles, Deterministic) {
  for (const auto &entry: msan::testing::heavy_atom_corpus()) {
    const auto a = parse_smiles(entry.smiles);
    const auto b = parse_smiles(entry.smiles);
    EXPECT_EQ(a.atoms, b.atoms);
    EXPECT_EQ(a.bonds, b.bonds);
    EXPECT_EQ(a.node_features, b.node_features);
  }
}

TEST(Featurize, OneHotPerBlock) {
  EXPECT_EQ(kFeatureDim, std::accumulate(kAttributeSizes.begin(),
                                         kAttributeSizes.end(), std::size_t { 0 }));
  const auto methane = parse_smiles("C");
  double ones = 0.0;
  for (double v: methane.node_features.data())
    ones += v;
  EXPECT_EQ(ones, 8.0);

  for (const auto &entry: msan::testing::heavy_atom_corpus()) {
    const auto g = parse_smiles(entry.smiles);
    for (std::size_t r = 0; r < g.num_atoms(); ++r) {
      const auto offsets = attribute_offsets();
      for (std::size_t b = 0; b < kNumAttributes; ++b) {
        double sum = 0.0;
        for (std::size_t k = 0; k < kAttributeSizes[b]; ++k)
          sum += g.node_features(r, offsets[b] + k);
        EXPECT_EQ(sum, 1.0) << entry.name << " atom " << r << " block " << b;
      }
    }
  }
}

TEST(Featurize, IdenticalMetaIdenticalRows) {
  const auto g = parse_smiles("CCCC");
  for (std::size_t c = 0; c < kFeatureDim; ++c) {
    EXPECT_EQ(g.node_features(0, c), g.node_features(3, c));
    EXPECT_EQ(g.node_features(1, c), g.node_features(2, c));
  }
}

TEST(Featurize, BenzeneVersusEthaneCarbon) {
  // Benzene C: degree 2, H 1, SP2, aromatic, in ring.
  // Ethane C: degree 1, H 3, SP3, aliphatic, acyclic.
  const auto benzene = parse_smiles("c1ccccc1").node_features;
  const auto ethane = parse_smiles("CC").node_features;
  EXPECT_EQ(block_slot(benzene, 0, 0), block_slot(ethane, 0, 0));
  EXPECT_EQ(block_slot(benzene, 0, 1), 2);
  EXPECT_EQ(block_slot(ethane, 0, 1), 1);
  EXPECT_EQ(block_slot(benzene, 0, 3), 1);
  EXPECT_EQ(block_slot(ethane, 0, 3), 3);
  EXPECT_EQ(block_slot(benzene, 0, 4),
            static_cast<std::size_t>(Hybridization::kSP2));
  EXPECT_EQ(block_slot(ethane, 0, 4),
            static_cast<std::size_t>(Hybridization::kSP3));
  EXPECT_EQ(block_slot(benzene, 0, 5), 1);
  EXPECT_EQ(block_slot(ethane, 0, 5), 0);
  EXPECT_EQ(block_slot(benzene, 0, 6), 1);
  EXPECT_EQ(block_slot(ethane, 0, 6), 0);
  EXPECT_EQ(block_slot(benzene, 0, 2), block_slot(ethane, 0, 2));
  EXPECT_EQ(block_slot(benzene, 0, 7), block_slot(ethane, 0, 7));
}

TEST(Featurize, OutOfVocabularyUsesOtherSlot) {
  MolecularGraph g;
  AtomMeta atom;
  atom.element = "Og";
  atom.degree = 9;
  atom.formal_charge = 5;
  atom.h_count = 7;
  g.atoms.push_back(atom);
  const Matrix x = featurize(g);
  for (std::size_t b = 0; b < 4; ++b)
    EXPECT_EQ(block_slot(x, 0, b), kAttributeSizes[b] - 1) << "block " << b;
}

TEST(Featurize, PermutationPermutesRows) {
  Rng rng = derive_rng(7, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = testing::random_molecule(rng, 2, 15);
    std::vector<std::size_t> order(g.num_atoms());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    shuffle(std::span(order), rng);
    const auto p = permute_atoms(g, order);
    const Matrix x = featurize(p);
    for (std::size_t i = 0; i < order.size(); ++i) {
      EXPECT_EQ(p.atoms[i], g.atoms[order[i]]);
      for (std::size_t c = 0; c < kFeatureDim; ++c)
        EXPECT_EQ(x(i, c), g.node_features(order[i], c));
    }
    EXPECT_EQ(p.bonds.size(), g.bonds.size());
  }
}

TEST(PermuteAtoms, RejectsNonPermutation) {
  const auto g = parse_smiles("CCO");
  const std::vector<std::size_t> bad { 0, 0, 1 };
  EXPECT_THROW(permute_atoms(g, bad), Error);
}

}  // namespace
}  // namespace msan::chem
