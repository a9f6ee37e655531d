//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/cli/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

#include "msan/error.h"

namespace msan::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::kConfigError, "invalid value '" + std::string(value)
                                           + "' for " + std::string(key));
}

long long to_int(std::string_view key, std::string_view value) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(key, value);
  return v;
}

double to_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used != value.size())
      bad_value(key, value);
    return v;
  } catch (const std::logic_error &) {
    bad_value(key, value);
  }
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on")
    return true;
  if (value == "false" || value == "0" || value == "no" || value == "off")
    return false;
  bad_value(key, value);
}

std::filesystem::path to_path(std::string_view value,
                              const std::filesystem::path &base_dir) {
  std::filesystem::path p { std::string(value) };
  if (p.is_relative() && !base_dir.empty())
    return base_dir / p;
  return p;
}

}  // namespace

std::uint64_t RunConfig::effective_seed() const {
  return seed + static_cast<std::uint64_t>(fold);
}

double RunConfig::lr_at(int epoch) const {
  double lr = lr_schedule.front().lr;
  for (const auto &stage: lr_schedule)
    if (epoch >= stage.start_epoch)
      lr = stage.lr;
  return lr;
}

void RunConfig::validate() const {
  if (epochs <= 0)
    throw Error(ErrorCode::kConfigError, "train.epochs must be > 0");
  if (batch_size <= 0)
    throw Error(ErrorCode::kConfigError, "train.batch_size must be > 0");
  if (patterns <= 0)
    throw Error(ErrorCode::kConfigError, "model.patterns must be > 0");
  if (fold < 0)
    throw Error(ErrorCode::kConfigError, "run.fold must be >= 0");
  if (lr_schedule.empty() || lr_schedule.front().start_epoch != 0)
    throw Error(ErrorCode::kConfigError,
                "train.lr_schedule must start at epoch 0");
  if (top_k <= 0)
    throw Error(ErrorCode::kConfigError, "explain.top_k must be > 0");
  gnn.validate();
}

std::vector<LrStage> parse_lr_schedule(std::string_view text) {
  std::vector<LrStage> stages;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        trim(text.substr(start, comma == std::string_view::npos
                                    ? std::string_view::npos
                                    : comma - start));
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      bad_value("train.lr_schedule", text);
    const auto epoch = to_int("train.lr_schedule", trim(item.substr(0, colon)));
    const double lr = to_double("train.lr_schedule", trim(item.substr(colon + 1)));
    if (epoch < 0 || lr <= 0.0
        || (!stages.empty() && epoch <= stages.back().start_epoch))
      bad_value("train.lr_schedule", text);
    stages.push_back({ static_cast<int>(epoch), lr });
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return stages;
}

void apply_setting(RunConfig &config, std::string_view key,
                   std::string_view raw_value,
                   const std::filesystem::path &base_dir) {
  const std::string value = trim(raw_value);
  if (key == "data.drugs") {
    config.drugs = to_path(value, base_dir);
  } else if (key == "data.pairs") {
    config.pairs = to_path(value, base_dir);
  } else if (key == "data.output_dir") {
    config.output_dir = to_path(value, base_dir);
  } else if (key == "data.checkpoint") {
    config.checkpoint = to_path(value, base_dir);
  } else if (key == "run.seed") {
    const auto v = to_int(key, value);
    if (v < 0)
      bad_value(key, value);
    config.seed = static_cast<std::uint64_t>(v);
  } else if (key == "run.fold") {
    config.fold = static_cast<int>(to_int(key, value));
  } else if (key == "run.mode") {
    if (value == "transductive")
      config.inductive = false;
    else if (value == "inductive")
      config.inductive = true;
    else
      bad_value(key, value);
  } else if (key == "train.epochs") {
    config.epochs = static_cast<int>(to_int(key, value));
  } else if (key == "train.batch_size") {
    config.batch_size = static_cast<int>(to_int(key, value));
  } else if (key == "train.lr_schedule") {
    config.lr_schedule = parse_lr_schedule(value);
  } else if (key == "train.augment") {
    config.augment = to_bool(key, value);
  } else if (key == "train.both_orderings") {
    config.both_orderings = to_bool(key, value);
  } else if (key == "model.patterns") {
    config.patterns = static_cast<int>(to_int(key, value));
  } else if (key == "model.substructures") {
    config.use_substructures = to_bool(key, value);
  } else if (key == "gnn.backbone") {
    config.gnn.backbone = gnn::parse_backbone(value);
  } else if (key == "gnn.layers") {
    config.gnn.layers = static_cast<int>(to_int(key, value));
  } else if (key == "gnn.dim") {
    config.gnn.dim = static_cast<int>(to_int(key, value));
  } else if (key == "gnn.heads") {
    config.gnn.heads = static_cast<int>(to_int(key, value));
  } else if (key == "fingerprint.radius") {
    config.fp_radius = static_cast<int>(to_int(key, value));
  } else if (key == "fingerprint.width") {
    const auto v = to_int(key, value);
    if (v <= 0)
      bad_value(key, value);
    config.fp_width = static_cast<std::size_t>(v);
  } else if (key == "explain.top_k") {
    config.top_k = static_cast<int>(to_int(key, value));
  } else {
    throw Error(ErrorCode::kConfigError,
                "unknown config key '" + std::string(key) + "'");
  }
  config.explicit_keys.insert(std::string(key));
}

void load_config_file(RunConfig &config, const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  const auto base = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string text = trim(line);
    if (text.empty())
      continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::kConfigError,
                  path.string() + ":" + std::to_string(lineno)
                      + ": expected 'key = value'");
    try {
      apply_setting(config, trim(text.substr(0, eq)), text.substr(eq + 1),
                    base);
    } catch (const Error &e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": "
                                + e.what());
    }
  }
}

}  // namespace msan::cli
