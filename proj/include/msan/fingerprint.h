//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_FINGERPRINT_H_
#define MSAN_FINGERPRINT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "msan/chem.h"

namespace msan::fingerprint {

inline constexpr int kDefaultRadius = 2;
inline constexpr std::size_t kDefaultWidth = 2048;

// Fixed-width bitset. Width is a power of two and a multiple of 64.
class Fingerprint {
public:
  Fingerprint() = default;
  explicit Fingerprint(std::size_t width, int radius = kDefaultRadius);

  std::size_t width() const { return width_; }
  int radius() const { return radius_; }

  void set(std::size_t bit);
  bool test(std::size_t bit) const;
  std::size_t count() const;

  const std::vector<std::uint64_t> &words() const { return words_; }

  // Byte k holds bits 8k..8k+7 (bit 8k+j is bit j of the byte); bytes are
  // written in ascending order as two lowercase hex digits.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex, int radius = kDefaultRadius);

  friend bool operator==(const Fingerprint &, const Fingerprint &) = default;

private:
  std::size_t width_ = 0;
  int radius_ = kDefaultRadius;
  std::vector<std::uint64_t> words_;
};

// Extended-connectivity fingerprint. Round 0 hashes (element, degree,
// H count, charge, ring flag, aromatic flag) per atom. Round r rehashes
// (r, own invariant, sorted (bond order, neighbor invariant) pairs). Every
// round-0 invariant sets bit (invariant mod width); later rounds emit only
// environments whose bond set grew and has not been emitted before,
// keeping the smallest invariant among atoms sharing one bond set.
Fingerprint ecfp(const chem::MolecularGraph &graph,
                 int radius = kDefaultRadius,
                 std::size_t width = kDefaultWidth);

// |a & b| / |a | b|; two empty fingerprints score 1. Throws WidthMismatch.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

struct PoolEntry {
  std::string drug_id;
  Fingerprint fp;
};

// Index of the pool entry with the highest Tanimoto similarity to `query`;
// ties go to the lexicographically smallest drug id. Throws EmptyPool.
std::size_t nearest_neighbor(const Fingerprint &query,
                             const std::vector<PoolEntry> &pool);

// `drug_id` itself when it is in the pool, otherwise its nearest neighbor.
const std::string &replacement_for(const std::string &drug_id,
                                   const Fingerprint &fp,
                                   const std::vector<PoolEntry> &pool);

using LogitFn =
    std::function<double(const std::string &, const std::string &, int)>;

// 0.5 * (sigmoid(logit(d1, d2, t)) + sigmoid(logit(nn(d1), nn(d2), t)))
// where nn replaces each drug by its nearest neighbor in `pool`.
double inductive_score(const std::string &drug1, const Fingerprint &fp1,
                       const std::string &drug2, const Fingerprint &fp2,
                       int type, const std::vector<PoolEntry> &pool,
                       const LogitFn &logit);

// One "drug_id<TAB>hex" line per entry.
void write_cache(const std::filesystem::path &path,
                 const std::vector<PoolEntry> &entries);
std::vector<PoolEntry> read_cache(const std::filesystem::path &path,
                                  int radius = kDefaultRadius);

}  // namespace msan::fingerprint

#endif  // MSAN_FINGERPRINT_H_
