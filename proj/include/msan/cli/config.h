//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_CLI_CONFIG_H_
#define MSAN_CLI_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "msan/gnn.h"

namespace msan::cli {

struct LrStage {
  int start_epoch;
  double lr;
};

// All knobs of a run. Defaults reproduce the reference setup: 300 epochs,
// lr 1e-3 then 1e-4 from epoch 200, batch 256, 60 patterns.
struct RunConfig {
  std::filesystem::path drugs = "drugs.csv";
  std::filesystem::path pairs = "pairs.csv";
  std::filesystem::path output_dir = "run";
  std::filesystem::path checkpoint;

  bool inductive = false;
  std::uint64_t seed = 0;
  int fold = 0;

  int epochs = 300;
  int batch_size = 256;
  std::vector<LrStage> lr_schedule = { { 0, 1e-3 }, { 200, 1e-4 } };
  bool augment = true;
  bool both_orderings = false;

  int patterns = 60;
  bool use_substructures = true;
  gnn::GnnConfig gnn { gnn::Backbone::kGIN, 3, 64, 2, true };

  int fp_radius = 2;
  std::size_t fp_width = 2048;
  int top_k = 10;

  // Keys set by a config file or override, for compatibility checks.
  std::set<std::string> explicit_keys;

  // seed + fold: fold f of a run with seed s draws from stream s + f.
  std::uint64_t effective_seed() const;
  double lr_at(int epoch) const;

  // Throws ConfigError on violated invariants (epochs, batch, M, gnn).
  void validate() const;
};

// Applies one `key = value` setting. Relative paths resolve against
// `base_dir`. Throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig &config, std::string_view key,
                   std::string_view value,
                   const std::filesystem::path &base_dir = {});

// Reads `key = value` lines; `#` starts a comment. Errors carry path:line.
void load_config_file(RunConfig &config, const std::filesystem::path &path);

std::vector<LrStage> parse_lr_schedule(std::string_view text);

}  // namespace msan::cli

#endif  // MSAN_CLI_CONFIG_H_
