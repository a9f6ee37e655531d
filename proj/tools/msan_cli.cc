//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msan/cli/commands.h"
#include "msan/cli/config.h"
#include "msan/error.h"

namespace {

using msan::cli::RunConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> fold;
  std::optional<std::string> backbone;
  bool inductive = false;
  bool no_augment = false;
  std::optional<int> top_k;
  std::optional<std::string> drugs, pairs, output_dir, checkpoint;
  std::vector<std::string> settings;
};

void add_common(CLI::App *cmd, CommonFlags &f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "root random seed");
  cmd->add_option("--fold", f.fold, "fold index (seed offset)");
  cmd->add_option("--backbone", f.backbone, "GNN backbone")
      ->check(CLI::IsMember({ "gcn", "gat", "gin" }, CLI::ignore_case));
  cmd->add_flag("--inductive", f.inductive, "inductive (new drug) protocol");
  cmd->add_flag("--no-augment", f.no_augment,
                "disable substructure-drop augmentation");
  cmd->add_option("--top-k", f.top_k, "rows in the explain table");
  cmd->add_option("--drugs", f.drugs, "drugs.csv (drug_id,smiles)");
  cmd->add_option("--pairs", f.pairs, "pairs.csv (drug1_id,drug2_id,ddi_type)");
  cmd->add_option("--output-dir", f.output_dir, "run directory");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint file");
  cmd->add_option("--set", f.settings, "override, e.g. --set train.epochs=5");
}

RunConfig resolve(const CommonFlags &f) {
  RunConfig config;
  if (!f.config.empty())
    msan::cli::load_config_file(config, f.config);
  for (const auto &s: f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw msan::Error(msan::ErrorCode::kConfigError,
                        "--set expects key=value, got '" + s + "'");
    msan::cli::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  auto set = [&](const char *key, const std::string &value) {
    msan::cli::apply_setting(config, key, value);
  };
  if (f.drugs)
    set("data.drugs", *f.drugs);
  if (f.pairs)
    set("data.pairs", *f.pairs);
  if (f.output_dir)
    set("data.output_dir", *f.output_dir);
  if (f.checkpoint)
    set("data.checkpoint", *f.checkpoint);
  if (f.seed)
    set("run.seed", std::to_string(*f.seed));
  if (f.fold)
    set("run.fold", std::to_string(*f.fold));
  if (f.backbone)
    set("gnn.backbone", *f.backbone);
  if (f.inductive)
    set("run.mode", "inductive");
  if (f.no_augment)
    set("train.augment", "false");
  if (f.top_k)
    set("explain.top_k", std::to_string(*f.top_k));
  return config;
}

int fail(std::string_view code, const std::string &message) {
  const nlohmann::json err = { { "error", code }, { "message", message } };
  std::cerr << err.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "Substructure-aware drug-drug interaction prediction", "msan" };
  app.require_subcommand(1);

  CommonFlags flags;
  std::string split;
  std::vector<int> folds;
  std::string drug1, drug2, type;

  auto *train = app.add_subcommand("train", "train a model");
  auto *eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto *predict = app.add_subcommand("predict", "score one drug pair");
  auto *explain = app.add_subcommand("explain", "substructure interactions");
  auto *split_cmd = app.add_subcommand("split", "write split manifests");
  for (auto *cmd: { train, eval, predict, explain, split_cmd })
    add_common(cmd, flags);

  eval->add_option("--split", split,
                   "train|valid|test, or train|valid|s1|s2 when inductive")
      ->required();
  eval->add_option("--folds", folds, "folds to aggregate (mean and std)")
      ->delimiter(',');
  for (auto *cmd: { predict, explain }) {
    cmd->add_option("--drug1", drug1, "first drug id")->required();
    cmd->add_option("--drug2", drug2, "second drug id")->required();
    cmd->add_option("--type", type, "DDI type label")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    const int code = fail("UsageError", e.what());
    return e.get_exit_code() != 0 ? e.get_exit_code() : code;
  }

  try {
    const RunConfig config = resolve(flags);
    nlohmann::json result;
    if (train->parsed())
      result = msan::cli::cmd_train(config, &std::cerr);
    else if (eval->parsed())
      result = msan::cli::cmd_eval(config, split, folds);
    else if (predict->parsed())
      result = msan::cli::cmd_predict(config, drug1, drug2, type);
    else if (explain->parsed())
      result = msan::cli::cmd_explain(config, drug1, drug2, type);
    else
      result = msan::cli::cmd_split(config);
    std::cout << result.dump(2) << std::endl;
    return 0;
  } catch (const msan::Error &e) {
    return fail(msan::error_name(e.code()), e.what());
  } catch (const std::exception &e) {
    return fail("InternalError", e.what());
  }
}
