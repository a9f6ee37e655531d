//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_set>

#include "msan/error.h"
#include "msan/random.h"

namespace msan::data {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

bool is_integer(const std::string &s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::size_t fraction_round(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
}

}  // namespace

std::vector<CsvRow> read_csv(const std::filesystem::path &path,
                             std::span<const std::string_view> header) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    auto fields = split_commas(line);
    if (!seen_header) {
      seen_header = true;
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0)
        fields[0].erase(0, 3);
      const bool ok = fields.size() == header.size()
                      && std::equal(fields.begin(), fields.end(),
                                    header.begin());
      if (!ok) {
        std::string expected;
        for (auto h: header)
          expected += (expected.empty() ? "" : ",") + std::string(h);
        throw Error(ErrorCode::kMalformedRow,
                    path.string() + ":" + std::to_string(lineno)
                        + ": expected header '" + expected + "'");
      }
      continue;
    }
    if (fields.size() != header.size()
        || std::any_of(fields.begin(), fields.end(),
                       [](const std::string &f) { return f.empty(); }))
      throw Error(ErrorCode::kMalformedRow,
                  path.string() + ":" + std::to_string(lineno) + ": expected "
                      + std::to_string(header.size()) + " non-empty fields");
    rows.push_back({ lineno, std::move(fields) });
  }
  if (!seen_header)
    throw Error(ErrorCode::kMalformedRow, path.string() + ": missing header");
  return rows;
}

DrugTable DrugTable::load(const std::filesystem::path &path) {
  static constexpr std::string_view kHeader[] = { "drug_id", "smiles" };
  DrugTable table;
  for (auto &row: read_csv(path, kHeader))
    table.add(std::move(row.fields[0]), std::move(row.fields[1]),
              path.string() + ":" + std::to_string(row.line));
  return table;
}

DrugTable DrugTable::from_entries(
    const std::vector<std::pair<std::string, std::string>> &rows) {
  DrugTable table;
  for (std::size_t i = 0; i < rows.size(); ++i)
    table.add(rows[i].first, rows[i].second, "entry " + std::to_string(i));
  return table;
}

void DrugTable::add(std::string id, std::string smiles,
                    const std::string &where) {
  if (index_.contains(id))
    throw Error(ErrorCode::kMalformedRow,
                where + ": duplicate drug id '" + id + "'");
  Drug drug;
  try {
    drug.graph = chem::parse_smiles(smiles);
  } catch (const Error &e) {
    throw Error(e.code(), where + ": drug '" + id + "': " + e.what());
  }
  drug.id = std::move(id);
  drug.smiles = std::move(smiles);
  index_.emplace(drug.id, drugs_.size());
  drugs_.push_back(std::move(drug));
}

std::optional<std::size_t> DrugTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

std::size_t DrugTable::index_of(std::string_view id) const {
  if (auto idx = find(id))
    return *idx;
  throw Error(ErrorCode::kUnknownDrugId,
              "unknown drug id '" + std::string(id) + "'");
}

TypeVocab::TypeVocab(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    index_.emplace(labels_[i], static_cast<int>(i));
}

TypeVocab TypeVocab::build(std::vector<std::string> raw_labels) {
  std::sort(raw_labels.begin(), raw_labels.end());
  raw_labels.erase(std::unique(raw_labels.begin(), raw_labels.end()),
                   raw_labels.end());
  if (std::all_of(raw_labels.begin(), raw_labels.end(), is_integer)) {
    std::sort(raw_labels.begin(), raw_labels.end(),
              [](const std::string &a, const std::string &b) {
                return std::stoll(a) < std::stoll(b);
              });
  }
  return TypeVocab(std::move(raw_labels));
}

std::optional<int> TypeVocab::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

PairData load_pairs(const std::filesystem::path &path,
                    const DrugTable &drugs) {
  static constexpr std::string_view kHeader[] = { "drug1_id", "drug2_id",
                                                  "ddi_type" };
  const auto rows = read_csv(path, kHeader);
  std::vector<std::string> raw_types;
  raw_types.reserve(rows.size());
  for (const auto &row: rows)
    raw_types.push_back(row.fields[2]);

  PairData out;
  out.types = TypeVocab::build(std::move(raw_types));
  out.positives.reserve(rows.size());
  for (const auto &row: rows) {
    DdiSample s;
    for (int k = 0; k < 2; ++k) {
      auto idx = drugs.find(row.fields[static_cast<std::size_t>(k)]);
      if (!idx)
        throw Error(ErrorCode::kUnknownDrugId,
                    path.string() + ":" + std::to_string(row.line)
                        + ": unknown drug id '"
                        + row.fields[static_cast<std::size_t>(k)] + "'");
      (k == 0 ? s.drug1 : s.drug2) = *idx;
    }
    s.type = *out.types.find(row.fields[2]);
    s.label = 1;
    out.positives.push_back(s);
  }
  return out;
}

std::uint64_t pair_key(std::size_t a, std::size_t b, int type) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 40) ^ (hi << 16) ^ static_cast<std::uint64_t>(type);
}

std::vector<DdiSample> sample_negatives(std::span<const DdiSample> positives,
                                        std::size_t num_drugs,
                                        std::uint64_t seed) {
  if (positives.empty())
    throw Error(ErrorCode::kEmptyBatch, "sample_negatives: no positives");
  if (num_drugs >= (std::size_t { 1 } << 24))
    throw Error(ErrorCode::kConfigError, "drug vocabulary too large");
  std::unordered_set<std::uint64_t> known;
  known.reserve(positives.size() * 2);
  for (const auto &p: positives)
    known.insert(pair_key(p.drug1, p.drug2, p.type));

  constexpr int kAttempts = 100;
  Rng rng = derive_rng(seed, 0x6e6567ULL);
  std::vector<DdiSample> negatives;
  negatives.reserve(positives.size());
  for (const auto &p: positives) {
    const bool first = bernoulli(rng, 0.5);
    bool placed = false;
    for (int side = 0; side < 2 && !placed; ++side) {
      const bool replace_first = (side == 0) == first;
      for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const std::size_t d = uniform_index(rng, num_drugs);
        DdiSample n = p;
        n.label = 0;
        (replace_first ? n.drug1 : n.drug2) = d;
        if (n.drug1 == n.drug2 || known.contains(pair_key(n.drug1, n.drug2, n.type)))
          continue;
        negatives.push_back(n);
        placed = true;
        break;
      }
    }
    if (!placed)
      throw Error(ErrorCode::kSamplingExhausted,
                  "could not corrupt a positive without collision after "
                      + std::to_string(2 * kAttempts) + " attempts");
  }
  return negatives;
}

TransductiveSplit split_transductive(std::span<const DdiSample> samples,
                                     std::uint64_t seed) {
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < samples.size(); ++i)
    strata[{ samples[i].type, samples[i].label }].push_back(i);

  Rng rng = derive_rng(seed, 0x7472616e73ULL);
  TransductiveSplit out;
  for (auto &[key, members]: strata) {
    shuffle(std::span(members), rng);
    const std::size_t n = members.size();
    const std::size_t n_valid = fraction_round(n, 0.2);
    const std::size_t n_test = fraction_round(n, 0.2);
    for (std::size_t k = 0; k < n; ++k) {
      const DdiSample &s = samples[members[k]];
      if (k < n_valid)
        out.valid.push_back(s);
      else if (k < n_valid + n_test)
        out.test.push_back(s);
      else
        out.train.push_back(s);
    }
  }
  return out;
}

InductiveSplit split_inductive(std::size_t num_drugs,
                               std::span<const DdiSample> samples,
                               std::uint64_t seed) {
  std::vector<std::size_t> order(num_drugs);
  std::iota(order.begin(), order.end(), std::size_t { 0 });
  Rng rng = derive_rng(seed, 0x696e64ULL);
  shuffle(std::span(order), rng);

  InductiveSplit out;
  out.is_new.assign(num_drugs, false);
  const std::size_t n_new = fraction_round(num_drugs, 0.2);
  for (std::size_t k = 0; k < n_new; ++k)
    out.is_new[order[k]] = true;

  for (const auto &s: samples) {
    const int fresh = (out.is_new[s.drug1] ? 1 : 0) + (out.is_new[s.drug2] ? 1 : 0);
    if (fresh == 0)
      out.train.push_back(s);
    else if (fresh == 2)
      out.s1.push_back(s);
    else
      out.s2.push_back(s);
  }
  return out;
}

Metrics compute_metrics(std::span<const double> scores,
                        std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw Error(ErrorCode::kShapeMismatch,
                "metrics need equally many scores and labels (>= 1)");
  Metrics m;
  m.count = scores.size();
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= 0.5;
    const bool actual = labels[i] == 1;
    if (predicted && actual)
      ++tp;
    else if (predicted)
      ++fp;
    else if (actual)
      ++fn;
    else
      ++tn;
  }
  const double n = static_cast<double>(scores.size());
  m.accuracy = static_cast<double>(tp + tn) / n;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;

  const std::size_t n_pos = tp + fn;
  const std::size_t n_neg = fp + tn;
  if (n_pos > 0 && n_neg > 0) {
    // Average ranks over tied groups; AUC = (R_pos - P(P+1)/2) / (P N).
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] < scores[b];
    });
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]])
        ++j;
      const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k)
        if (labels[order[k]] == 1)
          rank_sum += avg_rank;
      i = j + 1;
    }
    const double p = static_cast<double>(n_pos);
    m.auc = (rank_sum - p * (p + 1.0) / 2.0)
            / (p * static_cast<double>(n_neg));
  }
  return m;
}

}  // namespace msan::data
