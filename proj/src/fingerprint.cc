//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/fingerprint.h"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <utility>

#include "msan/error.h"
#include "msan/tensor.h"

namespace msan::fingerprint {
namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

std::uint64_t combine(std::uint64_t seed, std::uint64_t value) {
  return mix(seed ^ (mix(value) + 0x9e3779b97f4a7c15ULL + (seed << 6)
                     + (seed >> 2)));
}

std::uint64_t atom_invariant(const chem::AtomMeta &atom) {
  std::uint64_t h = 0x45434650ULL;
  for (char c: atom.element)
    h = combine(h, static_cast<unsigned char>(c));
  h = combine(h, static_cast<std::uint64_t>(atom.degree));
  h = combine(h, static_cast<std::uint64_t>(atom.h_count));
  h = combine(h, static_cast<std::uint64_t>(atom.formal_charge + 128));
  h = combine(h, atom.in_ring ? 1 : 0);
  h = combine(h, atom.aromatic ? 1 : 0);
  return h;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

}  // namespace

Fingerprint::Fingerprint(std::size_t width, int radius)
    : width_(width), radius_(radius) {
  if (width < 64 || !std::has_single_bit(width))
    throw Error(ErrorCode::kWidthMismatch,
                "fingerprint width must be a power of two >= 64, got "
                    + std::to_string(width));
  words_.assign(width / 64, 0);
}

void Fingerprint::set(std::size_t bit) {
  words_[bit / 64] |= std::uint64_t { 1 } << (bit % 64);
}

bool Fingerprint::test(std::size_t bit) const {
  return ((words_[bit / 64] >> (bit % 64)) & 1U) != 0;
}

std::size_t Fingerprint::count() const {
  std::size_t n = 0;
  for (auto w: words_)
    n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(width_ / 4);
  for (std::size_t byte = 0; byte < width_ / 8; ++byte) {
    const auto value = static_cast<unsigned>(
        (words_[byte / 8] >> ((byte % 8) * 8)) & 0xffU);
    out.push_back(kDigits[value >> 4]);
    out.push_back(kDigits[value & 0xfU]);
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, int radius) {
  if (hex.size() % 2 != 0)
    throw Error(ErrorCode::kWidthMismatch, "odd-length fingerprint hex");
  Fingerprint fp(hex.size() * 4, radius);
  for (std::size_t byte = 0; byte < hex.size() / 2; ++byte) {
    const int hi = hex_value(hex[2 * byte]);
    const int lo = hex_value(hex[2 * byte + 1]);
    if (hi < 0 || lo < 0)
      throw Error(ErrorCode::kMalformedRow, "invalid hex digit in fingerprint");
    const auto value = static_cast<std::uint64_t>(hi * 16 + lo);
    fp.words_[byte / 8] |= value << ((byte % 8) * 8);
  }
  return fp;
}

Fingerprint ecfp(const chem::MolecularGraph &graph, int radius,
                 std::size_t width) {
  Fingerprint fp(width, radius);
  const std::size_t n = graph.num_atoms();
  const std::size_t nb = graph.bonds.size();

  std::vector<std::uint64_t> invariant(n);
  for (std::size_t i = 0; i < n; ++i) {
    invariant[i] = atom_invariant(graph.atoms[i]);
    fp.set(invariant[i] & (width - 1));
  }

  // (bond index, neighbor) incidence lists.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incident(n);
  for (std::size_t b = 0; b < nb; ++b) {
    incident[graph.bonds[b].begin].emplace_back(b, graph.bonds[b].end);
    incident[graph.bonds[b].end].emplace_back(b, graph.bonds[b].begin);
  }

  std::vector<std::vector<bool>> env(n, std::vector<bool>(nb, false));
  std::set<std::vector<bool>> seen;

  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    std::vector<std::vector<bool>> next_env = env;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> around;
      for (auto [b, j]: incident[i]) {
        around.emplace_back(
            static_cast<std::uint64_t>(graph.bonds[b].order), invariant[j]);
        next_env[i][b] = true;
        for (std::size_t k = 0; k < nb; ++k)
          if (env[j][k])
            next_env[i][k] = true;
      }
      std::sort(around.begin(), around.end());
      std::uint64_t h = combine(static_cast<std::uint64_t>(r), invariant[i]);
      for (auto [order, inv]: around)
        h = combine(combine(h, order), inv);
      next[i] = h;
    }

    std::vector<std::pair<std::vector<bool>, std::uint64_t>> grown;
    for (std::size_t i = 0; i < n; ++i)
      if (next_env[i] != env[i])
        grown.emplace_back(next_env[i], next[i]);
    std::sort(grown.begin(), grown.end());
    for (const auto &[bonds, inv]: grown) {
      if (!seen.insert(bonds).second)
        continue;
      fp.set(inv & (width - 1));
    }

    invariant = std::move(next);
    env = std::move(next_env);
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width() != b.width())
    throw Error(ErrorCode::kWidthMismatch,
                "tanimoto: widths " + std::to_string(a.width()) + " and "
                    + std::to_string(b.width()));
  std::size_t both = 0, either = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += static_cast<std::size_t>(
        std::popcount(a.words()[w] & b.words()[w]));
    either += static_cast<std::size_t>(
        std::popcount(a.words()[w] | b.words()[w]));
  }
  if (either == 0)
    return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

std::size_t nearest_neighbor(const Fingerprint &query,
                             const std::vector<PoolEntry> &pool) {
  if (pool.empty())
    throw Error(ErrorCode::kEmptyPool, "nearest_neighbor on an empty pool");
  std::size_t best = 0;
  double best_sim = tanimoto(query, pool[0].fp);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const double sim = tanimoto(query, pool[i].fp);
    if (sim > best_sim
        || (sim == best_sim && pool[i].drug_id < pool[best].drug_id)) {
      best = i;
      best_sim = sim;
    }
  }
  return best;
}

const std::string &replacement_for(const std::string &drug_id,
                                   const Fingerprint &fp,
                                   const std::vector<PoolEntry> &pool) {
  for (const auto &entry: pool)
    if (entry.drug_id == drug_id)
      return entry.drug_id;
  return pool[nearest_neighbor(fp, pool)].drug_id;
}

double inductive_score(const std::string &drug1, const Fingerprint &fp1,
                       const std::string &drug2, const Fingerprint &fp2,
                       int type, const std::vector<PoolEntry> &pool,
                       const LogitFn &logit) {
  const double original = tensor::sigmoid(logit(drug1, drug2, type));
  const std::string &r1 = replacement_for(drug1, fp1, pool);
  const std::string &r2 = replacement_for(drug2, fp2, pool);
  const double replaced = (r1 == drug1 && r2 == drug2)
                              ? original
                              : tensor::sigmoid(logit(r1, r2, type));
  return 0.5 * (original + replaced);
}

void write_cache(const std::filesystem::path &path,
                 const std::vector<PoolEntry> &entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto &e: entries)
    out << e.drug_id << '\t' << e.fp.to_hex() << '\n';
  if (!out)
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<PoolEntry> read_cache(const std::filesystem::path &path,
                                  int radius) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<PoolEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw Error(ErrorCode::kMalformedRow,
                  path.string() + ":" + std::to_string(lineno)
                      + ": expected drug_id<TAB>hex");
    entries.push_back({ line.substr(0, tab),
                        Fingerprint::from_hex(
                            std::string_view(line).substr(tab + 1), radius) });
  }
  return entries;
}

}  // namespace msan::fingerprint
