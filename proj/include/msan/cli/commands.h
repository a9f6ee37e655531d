//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_CLI_COMMANDS_H_
#define MSAN_CLI_COMMANDS_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msan/cli/config.h"
#include "msan/cli/pipeline.h"
#include "msan/model.h"

namespace msan::cli {

// Replaces every "{fold}" in `path` by `fold`.
std::filesystem::path with_fold(const std::filesystem::path &path, int fold);

// Checkpoint used by eval/predict/explain: config.checkpoint, or
// <output_dir>/checkpoint_best.bin.
std::filesystem::path checkpoint_path(const RunConfig &config);

// Header fields describing the model and the run that produced it.
nlohmann::json checkpoint_header(const RunConfig &config,
                                 const model::ModelConfig &model,
                                 const data::TypeVocab &types);

// Rebuilds the model stored at `path`. Explicitly configured model keys and
// the dataset's type vocabulary must agree with the header, otherwise
// IncompatibleCheckpoint.
model::MsanModel load_model(const std::filesystem::path &path,
                            const RunConfig &config,
                            const data::TypeVocab &types,
                            nlohmann::json *header = nullptr);

nlohmann::json metrics_json(const data::Metrics &m);

// Writes <output_dir>/split_manifest.csv (input columns plus label and
// split) and, in inductive mode, drug_groups.csv.
nlohmann::json cmd_split(const RunConfig &config);

// Writes checkpoint_best.bin (highest validation AUC), checkpoint_final.bin
// and train_log.jsonl (one JSON object per epoch) into the output dir.
// Progress lines go to `progress` when non-null.
nlohmann::json cmd_train(const RunConfig &config, std::ostream *progress);

// Metrics of `split` for every fold in `folds` (empty = config.fold), plus
// mean and population std per metric. Also written to
// <output_dir>/metrics_<split>.json for the first fold's output dir.
nlohmann::json cmd_eval(const RunConfig &config, const std::string &split,
                        const std::vector<int> &folds);

nlohmann::json cmd_predict(const RunConfig &config, const std::string &drug1,
                           const std::string &drug2, const std::string &type);

nlohmann::json cmd_explain(const RunConfig &config, const std::string &drug1,
                           const std::string &drug2, const std::string &type);

}  // namespace msan::cli

#endif  // MSAN_CLI_COMMANDS_H_
