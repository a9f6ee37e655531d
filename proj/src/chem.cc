//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/chem.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "msan/error.h"

namespace msan::chem {
namespace {

constexpr std::array<std::string_view, 118> kPeriodicTable = {
  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
  "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
  "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
  "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
  "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
  "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
  "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
  "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
  "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
  "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

// Elements with a dedicated one-hot slot; anything else maps to "other".
constexpr std::array<std::string_view, 43> kElementVocab = {
  "C",  "N",  "O",  "S",  "F",  "Si", "P",  "Cl", "Br", "Mg", "Na",
  "Ca", "Fe", "As", "Al", "I",  "B",  "V",  "K",  "Tl", "Yb", "Sb",
  "Sn", "Ag", "Pd", "Co", "Se", "Ti", "Zn", "H",  "Li", "Ge", "Cu",
  "Au", "Ni", "Cd", "In", "Mn", "Zr", "Cr", "Pt", "Hg", "Pb",
};

constexpr int kMaxDegree = 5;
constexpr int kMinCharge = -2;
constexpr int kMaxCharge = 2;
constexpr int kMaxHydrogens = 4;

bool is_element(std::string_view symbol) {
  return std::find(kPeriodicTable.begin(), kPeriodicTable.end(), symbol)
         != kPeriodicTable.end();
}

// Default valences for the organic subset.
std::vector<int> default_valences(std::string_view element) {
  if (element == "B")
    return { 3 };
  if (element == "C")
    return { 4 };
  if (element == "N")
    return { 3, 5 };
  if (element == "O")
    return { 2 };
  if (element == "P")
    return { 3, 5 };
  if (element == "S")
    return { 2, 4, 6 };
  if (element == "F" || element == "Cl" || element == "Br" || element == "I")
    return { 1 };
  return {};
}

struct RawAtom {
  std::string element;
  bool aromatic = false;
  bool bracket = false;
  int charge = 0;
  int hcount = 0;
  Chirality chirality = Chirality::kNone;
};

struct RawBond {
  std::size_t begin;
  std::size_t end;
  char symbol;  // 0 when implicit
};

struct RingOpening {
  std::size_t atom;
  char symbol;
};

[[noreturn]] void fail(ErrorCode code, std::string_view smiles,
                       std::size_t pos, std::string_view what) {
  throw Error(code, std::string(what) + " at position " + std::to_string(pos)
                        + " in \"" + std::string(smiles) + "\"");
}

class SmilesReader {
public:
  explicit SmilesReader(std::string_view s): s_(s) { }

  void run() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (static_cast<unsigned char>(c) > 127)
        fail(ErrorCode::kSyntaxError, s_, pos_, "non-ASCII character");

      if (c == '(') {
        if (!prev_ || pending_bond_ != 0)
          fail(ErrorCode::kSyntaxError, s_, pos_, "branch without atom");
        branches_.push_back(*prev_);
        ++pos_;
      } else if (c == ')') {
        if (branches_.empty())
          fail(ErrorCode::kUnbalancedParen, s_, pos_, "unmatched ')'");
        if (pending_bond_ != 0)
          fail(ErrorCode::kSyntaxError, s_, pos_, "dangling bond");
        prev_ = branches_.back();
        branches_.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == '$' || c == ':'
                 || c == '/' || c == '\\') {
        if (pending_bond_ != 0 || !prev_)
          fail(ErrorCode::kSyntaxError, s_, pos_, "misplaced bond symbol");
        pending_bond_ = c;
        ++pos_;
      } else if (c == '.') {
        if (pending_bond_ != 0 || !prev_)
          fail(ErrorCode::kSyntaxError, s_, pos_, "misplaced '.'");
        prev_.reset();
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
        ring_closure(c - '0');
        ++pos_;
      } else if (c == '%') {
        if (pos_ + 2 >= s_.size()
            || std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) == 0
            || std::isdigit(static_cast<unsigned char>(s_[pos_ + 2])) == 0)
          fail(ErrorCode::kSyntaxError, s_, pos_, "malformed %nn ring label");
        ring_closure((s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0'));
        pos_ += 3;
      } else if (c == '[') {
        add_atom(bracket_atom());
      } else {
        add_atom(organic_atom());
      }
    }

    if (!branches_.empty())
      fail(ErrorCode::kUnbalancedParen, s_, pos_, "unclosed '('");
    if (pending_bond_ != 0)
      fail(ErrorCode::kSyntaxError, s_, pos_, "dangling bond");
    if (!rings_.empty())
      fail(ErrorCode::kUnmatchedRingBond, s_, pos_,
           "ring bond " + std::to_string(rings_.begin()->first)
               + " never closed");
  }

  std::vector<RawAtom> atoms;
  std::vector<RawBond> bonds;

private:
  void add_bond(std::size_t a, std::size_t b, char symbol) {
    if (a == b)
      fail(ErrorCode::kSyntaxError, s_, pos_, "self-bond");
    for (const auto &bond: bonds) {
      if ((bond.begin == a && bond.end == b)
          || (bond.begin == b && bond.end == a))
        fail(ErrorCode::kSyntaxError, s_, pos_, "duplicate bond");
    }
    bonds.push_back({ a, b, symbol });
  }

  void add_atom(RawAtom atom) {
    const std::size_t idx = atoms.size();
    atoms.push_back(std::move(atom));
    if (prev_)
      add_bond(*prev_, idx, pending_bond_);
    pending_bond_ = 0;
    prev_ = idx;
  }

  void ring_closure(int label) {
    if (!prev_)
      fail(ErrorCode::kSyntaxError, s_, pos_, "ring label without atom");
    auto it = rings_.find(label);
    if (it == rings_.end()) {
      rings_.emplace(label, RingOpening { *prev_, pending_bond_ });
    } else {
      const char open = it->second.symbol;
      if (open != 0 && pending_bond_ != 0 && open != pending_bond_
          && !(is_directional(open) && is_directional(pending_bond_)))
        fail(ErrorCode::kSyntaxError, s_, pos_, "conflicting ring bond");
      add_bond(it->second.atom, *prev_, open != 0 ? open : pending_bond_);
      rings_.erase(it);
    }
    pending_bond_ = 0;
  }

  static bool is_directional(char c) { return c == '/' || c == '\\'; }

  RawAtom organic_atom() {
    RawAtom atom;
    const char c = s_[pos_];
    if (c == '*') {
      atom.element = "*";
      ++pos_;
      return atom;
    }
    if (s_.substr(pos_, 2) == "Cl" || s_.substr(pos_, 2) == "Br") {
      atom.element = std::string(s_.substr(pos_, 2));
      pos_ += 2;
      return atom;
    }
    switch (c) {
    case 'B':
    case 'C':
    case 'N':
    case 'O':
    case 'P':
    case 'S':
    case 'F':
    case 'I':
      atom.element = std::string(1, c);
      break;
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's':
      atom.element = std::string(1, static_cast<char>(std::toupper(c)));
      atom.aromatic = true;
      break;
    default:
      if (std::isalpha(static_cast<unsigned char>(c)) != 0)
        fail(ErrorCode::kUnknownAtomSymbol, s_, pos_,
             std::string("unknown atom symbol '") + c + "'");
      fail(ErrorCode::kSyntaxError, s_, pos_,
           std::string("unexpected character '") + c + "'");
    }
    ++pos_;
    return atom;
  }

  bool at_digit() const {
    return pos_ < s_.size()
           && std::isdigit(static_cast<unsigned char>(s_[pos_])) != 0;
  }

  int read_number() {
    int value = 0;
    while (at_digit()) {
      value = value * 10 + (s_[pos_] - '0');
      ++pos_;
    }
    return value;
  }

  RawAtom bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    RawAtom atom;
    atom.bracket = true;

    read_number();  // isotope; not an attribute

    if (pos_ >= s_.size())
      fail(ErrorCode::kSyntaxError, s_, start, "unterminated bracket atom");
    const char c = s_[pos_];
    if (c == '*') {
      atom.element = "*";
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(c)) != 0) {
      const std::string two(s_.substr(pos_, 2));
      if (two.size() == 2
          && std::islower(static_cast<unsigned char>(two[1])) != 0
          && is_element(two)) {
        atom.element = two;
        pos_ += 2;
      } else if (is_element(std::string(1, c))) {
        atom.element = std::string(1, c);
        ++pos_;
      } else {
        fail(ErrorCode::kUnknownAtomSymbol, s_, pos_,
             "unknown element in bracket atom");
      }
    } else if (std::islower(static_cast<unsigned char>(c)) != 0) {
      const std::string_view two = s_.substr(pos_, 2);
      if (two == "se" || two == "as" || two == "te") {
        atom.element = std::string(two);
        atom.element[0] = static_cast<char>(std::toupper(atom.element[0]));
        pos_ += 2;
      } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
        atom.element = std::string(1, static_cast<char>(std::toupper(c)));
        ++pos_;
      } else {
        fail(ErrorCode::kUnknownAtomSymbol, s_, pos_,
             "unknown aromatic symbol in bracket atom");
      }
      atom.aromatic = true;
    } else {
      fail(ErrorCode::kUnknownAtomSymbol, s_, pos_,
           "missing element in bracket atom");
    }

    if (pos_ < s_.size() && s_[pos_] == '@') {
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '@') {
        ++pos_;
        atom.chirality = Chirality::kClockwise;
      } else if (pos_ + 1 < s_.size()
                 && std::isupper(static_cast<unsigned char>(s_[pos_])) != 0
                 && std::isupper(static_cast<unsigned char>(s_[pos_ + 1]))
                        != 0) {
        const std::string_view cls = s_.substr(pos_, 2);
        pos_ += 2;
        const int n = read_number();
        if (cls == "TH" && n == 1)
          atom.chirality = Chirality::kCounterClockwise;
        else if (cls == "TH" && n == 2)
          atom.chirality = Chirality::kClockwise;
        else
          atom.chirality = Chirality::kOther;
      } else {
        atom.chirality = Chirality::kCounterClockwise;
      }
    }

    if (pos_ < s_.size() && s_[pos_] == 'H') {
      ++pos_;
      atom.hcount = at_digit() ? read_number() : 1;
    }

    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      const char sign = s_[pos_];
      ++pos_;
      int magnitude = 1;
      if (at_digit()) {
        magnitude = read_number();
      } else {
        while (pos_ < s_.size() && s_[pos_] == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.charge = sign == '+' ? magnitude : -magnitude;
    }

    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      if (!at_digit())
        fail(ErrorCode::kSyntaxError, s_, pos_, "malformed atom class");
      read_number();
    }

    if (pos_ >= s_.size() || s_[pos_] != ']')
      fail(ErrorCode::kSyntaxError, s_, start, "unterminated bracket atom");
    ++pos_;
    return atom;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::optional<std::size_t> prev_;
  char pending_bond_ = 0;
  std::vector<std::size_t> branches_;
  std::map<int, RingOpening> rings_;
};

BondOrder resolve_order(char symbol, bool both_aromatic) {
  switch (symbol) {
  case '=':
    return BondOrder::kDouble;
  case '#':
    return BondOrder::kTriple;
  case '$':
    return BondOrder::kQuadruple;
  case ':':
    return BondOrder::kAromatic;
  case 0:
    return both_aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
  default:
    return BondOrder::kSingle;
  }
}

int valence_contribution(BondOrder order) {
  switch (order) {
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  case BondOrder::kQuadruple:
    return 4;
  default:
    return 1;
  }
}

// Marks bonds that lie on a cycle: a bond is cyclic iff it is not a bridge.
std::vector<bool> cyclic_bonds(std::size_t n, const std::vector<Bond> &bonds) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    adj[bonds[b].begin].emplace_back(bonds[b].end, b);
    adj[bonds[b].end].emplace_back(bonds[b].begin, b);
  }

  std::vector<bool> cyclic(bonds.size(), true);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;

  std::function<void(std::size_t, std::size_t)> dfs =
      [&](std::size_t v, std::size_t via) {
        disc[v] = low[v] = timer++;
        for (auto [u, b]: adj[v]) {
          if (b == via)
            continue;
          if (disc[u] >= 0) {
            low[v] = std::min(low[v], disc[u]);
          } else {
            dfs(u, b);
            low[v] = std::min(low[v], low[u]);
            if (low[u] > disc[v])
              cyclic[b] = false;
          }
        }
      };
  for (std::size_t v = 0; v < n; ++v)
    if (disc[v] < 0)
      dfs(v, bonds.size());
  return cyclic;
}

std::size_t slot_or_other(int value, int lo, int hi) {
  if (value < lo || value > hi)
    return static_cast<std::size_t>(hi - lo + 1);
  return static_cast<std::size_t>(value - lo);
}

}  // namespace

const std::array<std::size_t, kNumAttributes> kAttributeSizes = {
  kElementVocab.size() + 1,
  kMaxDegree + 2,
  kMaxCharge - kMinCharge + 2,
  kMaxHydrogens + 2,
  7,
  2,
  2,
  4,
};

const std::size_t kFeatureDim = std::accumulate(
    kAttributeSizes.begin(), kAttributeSizes.end(), std::size_t { 0 });

std::array<std::size_t, kNumAttributes> attribute_offsets() {
  std::array<std::size_t, kNumAttributes> offsets {};
  std::size_t acc = 0;
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    offsets[i] = acc;
    acc += kAttributeSizes[i];
  }
  return offsets;
}

std::vector<std::vector<std::size_t>> MolecularGraph::neighbors() const {
  std::vector<std::vector<std::size_t>> adj(atoms.size());
  for (const auto &bond: bonds) {
    adj[bond.begin].push_back(bond.end);
    adj[bond.end].push_back(bond.begin);
  }
  return adj;
}

MolecularGraph parse_smiles(std::string_view smiles) {
  if (smiles.empty())
    throw Error(ErrorCode::kEmptyInput, "empty SMILES string");

  SmilesReader reader(smiles);
  reader.run();
  auto &raw = reader.atoms;
  const auto &raw_bonds = reader.bonds;

  std::vector<BondOrder> orders;
  orders.reserve(raw_bonds.size());
  for (const auto &b: raw_bonds)
    orders.push_back(resolve_order(
        b.symbol, raw[b.begin].aromatic && raw[b.end].aromatic));

  // Implicit hydrogens on organic-subset atoms. Aromatic atoms reserve one
  // valence unit for the delocalized bond and only use their lowest valence.
  std::vector<int> bond_sum(raw.size(), 0);
  for (std::size_t b = 0; b < raw_bonds.size(); ++b) {
    const int v = valence_contribution(orders[b]);
    bond_sum[raw_bonds[b].begin] += v;
    bond_sum[raw_bonds[b].end] += v;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    RawAtom &atom = raw[i];
    if (atom.bracket)
      continue;
    const auto valences = default_valences(atom.element);
    if (valences.empty())
      continue;
    if (atom.aromatic) {
      atom.hcount = std::max(0, valences.front() - (bond_sum[i] + 1));
      continue;
    }
    atom.hcount = 0;
    for (int v: valences) {
      if (v >= bond_sum[i]) {
        atom.hcount = v - bond_sum[i];
        break;
      }
    }
  }

  // Fold hydrogen atoms bonded to exactly one heavy atom.
  std::vector<std::vector<std::size_t>> raw_adj(raw.size());
  for (const auto &b: raw_bonds) {
    raw_adj[b.begin].push_back(b.end);
    raw_adj[b.end].push_back(b.begin);
  }
  std::vector<bool> folded(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].element != "H" || raw_adj[i].size() != 1)
      continue;
    const std::size_t host = raw_adj[i][0];
    if (raw[host].element == "H")
      continue;
    folded[i] = true;
    raw[host].hcount += 1 + raw[i].hcount;
  }

  std::vector<std::size_t> new_index(raw.size(), 0);
  MolecularGraph graph;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (folded[i])
      continue;
    new_index[i] = graph.atoms.size();
    AtomMeta meta;
    meta.element = raw[i].element;
    meta.formal_charge = raw[i].charge;
    meta.h_count = raw[i].hcount;
    meta.aromatic = raw[i].aromatic;
    meta.chirality = raw[i].chirality;
    graph.atoms.push_back(std::move(meta));
  }
  for (std::size_t b = 0; b < raw_bonds.size(); ++b) {
    if (folded[raw_bonds[b].begin] || folded[raw_bonds[b].end])
      continue;
    graph.bonds.push_back({ new_index[raw_bonds[b].begin],
                            new_index[raw_bonds[b].end], orders[b] });
  }

  const auto cyclic = cyclic_bonds(graph.atoms.size(), graph.bonds);
  std::vector<int> doubles(graph.atoms.size(), 0),
      triples(graph.atoms.size(), 0);
  for (std::size_t b = 0; b < graph.bonds.size(); ++b) {
    Bond &bond = graph.bonds[b];
    if (bond.order == BondOrder::kAromatic && !cyclic[b])
      bond.order = BondOrder::kSingle;
    if (cyclic[b]) {
      graph.atoms[bond.begin].in_ring = true;
      graph.atoms[bond.end].in_ring = true;
    }
    for (std::size_t end: { bond.begin, bond.end }) {
      ++graph.atoms[end].degree;
      if (bond.order == BondOrder::kDouble)
        ++doubles[end];
      else if (bond.order == BondOrder::kTriple
               || bond.order == BondOrder::kQuadruple)
        ++triples[end];
    }
  }

  for (std::size_t i = 0; i < graph.atoms.size(); ++i) {
    AtomMeta &atom = graph.atoms[i];
    const int total_degree = atom.degree + atom.h_count;
    if (total_degree == 0)
      atom.hybridization = Hybridization::kS;
    else if (triples[i] > 0 || doubles[i] >= 2)
      atom.hybridization = Hybridization::kSP;
    else if (atom.aromatic || doubles[i] == 1)
      atom.hybridization = Hybridization::kSP2;
    else if (total_degree == 5)
      atom.hybridization = Hybridization::kSP3D;
    else if (total_degree == 6)
      atom.hybridization = Hybridization::kSP3D2;
    else if (total_degree <= 4)
      atom.hybridization = Hybridization::kSP3;
    else
      atom.hybridization = Hybridization::kOther;
  }

  graph.node_features = featurize(graph);
  return graph;
}

Matrix featurize(const MolecularGraph &graph) {
  const auto offsets = attribute_offsets();
  Matrix x(graph.atoms.size(), kFeatureDim);
  for (std::size_t i = 0; i < graph.atoms.size(); ++i) {
    const AtomMeta &atom = graph.atoms[i];
    const auto element_it =
        std::find(kElementVocab.begin(), kElementVocab.end(), atom.element);
    const std::array<std::size_t, kNumAttributes> slots = {
      static_cast<std::size_t>(element_it - kElementVocab.begin()),
      slot_or_other(atom.degree, 0, kMaxDegree),
      slot_or_other(atom.formal_charge, kMinCharge, kMaxCharge),
      slot_or_other(atom.h_count, 0, kMaxHydrogens),
      static_cast<std::size_t>(atom.hybridization),
      atom.aromatic ? 1U : 0U,
      atom.in_ring ? 1U : 0U,
      static_cast<std::size_t>(atom.chirality),
    };
    for (std::size_t a = 0; a < kNumAttributes; ++a)
      x(i, offsets[a] + slots[a]) = 1.0;
  }
  return x;
}

MolecularGraph permute_atoms(const MolecularGraph &graph,
                             std::span<const std::size_t> order) {
  const std::size_t n = graph.num_atoms();
  if (order.size() != n)
    throw Error(ErrorCode::kShapeMismatch,
                "permutation length does not match atom count");
  std::vector<std::size_t> inverse(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (order[i] >= n || inverse[order[i]] != n)
      throw Error(ErrorCode::kShapeMismatch, "not a permutation");
    inverse[order[i]] = i;
  }

  MolecularGraph out;
  out.atoms.reserve(n);
  out.node_features = Matrix(n, graph.node_features.cols());
  for (std::size_t i = 0; i < n; ++i) {
    out.atoms.push_back(graph.atoms[order[i]]);
    auto src = graph.node_features.row(order[i]);
    std::copy(src.begin(), src.end(), out.node_features.row(i).begin());
  }
  out.bonds.reserve(graph.bonds.size());
  for (const auto &bond: graph.bonds)
    out.bonds.push_back({ inverse[bond.begin], inverse[bond.end], bond.order });
  return out;
}

}  // namespace msan::chem
