//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "msan/checkpoint.h"
#include "msan/cli/commands.h"
#include "msan/cli/config.h"
#include "msan/error.h"
#include "msan/synthetic.h"

namespace msan::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("msan_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Synthetic dataset plus a small, fast configuration.
RunConfig small_run(const fs::path &dir) {
  synthetic::write_dataset(synthetic::make_dataset(0), dir.string());
  RunConfig c;
  apply_setting(c, "data.drugs", (dir / "drugs.csv").string());
  apply_setting(c, "data.pairs", (dir / "pairs.csv").string());
  apply_setting(c, "data.output_dir", (dir / "run").string());
  apply_setting(c, "train.epochs", "2");
  apply_setting(c, "train.batch_size", "32");
  apply_setting(c, "model.patterns", "4");
  apply_setting(c, "gnn.layers", "2");
  apply_setting(c, "gnn.dim", "8");
  return c;
}

ErrorCode code_of(const std::function<void()> &fn, std::string *msg = nullptr) {
  try {
    fn();
  } catch (const Error &e) {
    if (msg != nullptr)
      *msg = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIoError;
}

TEST(Config, Defaults) {
  RunConfig c;
  EXPECT_EQ(c.epochs, 300);
  EXPECT_EQ(c.batch_size, 256);
  EXPECT_EQ(c.patterns, 60);
  EXPECT_EQ(c.gnn.backbone, gnn::Backbone::kGIN);
  EXPECT_DOUBLE_EQ(c.lr_at(0), 1e-3);
  EXPECT_DOUBLE_EQ(c.lr_at(199), 1e-3);
  EXPECT_DOUBLE_EQ(c.lr_at(200), 1e-4);
  EXPECT_DOUBLE_EQ(c.lr_at(299), 1e-4);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, FileAndOverrides) {
  const auto dir = scratch("config");
  std::ofstream(dir / "run.cfg") << "# comment\n"
                                    "data.drugs = d.csv\n"
                                    "run.mode = inductive  # trailing\n"
                                    "run.seed = 7\nrun.fold = 2\n"
                                    "gnn.backbone = GAT\n"
                                    "train.lr_schedule = 0:0.01, 5:0.001\n"
                                    "\n"
                                    "explain.top_k = 3\n";
  RunConfig c;
  load_config_file(c, dir / "run.cfg");
  EXPECT_EQ(c.drugs, dir / "d.csv");
  EXPECT_TRUE(c.inductive);
  EXPECT_EQ(c.effective_seed(), 9U);
  EXPECT_EQ(c.gnn.backbone, gnn::Backbone::kGAT);
  EXPECT_DOUBLE_EQ(c.lr_at(4), 0.01);
  EXPECT_DOUBLE_EQ(c.lr_at(5), 0.001);
  EXPECT_EQ(c.top_k, 3);
  EXPECT_TRUE(c.explicit_keys.contains("gnn.backbone"));
  EXPECT_FALSE(c.explicit_keys.contains("gnn.dim"));
}

TEST(Config, ErrorsCarryLocation) {
  const auto dir = scratch("config_err");
  std::ofstream(dir / "bad.cfg") << "run.seed = 1\nno_equals_sign\n";
  std::ofstream(dir / "unknown.cfg") << "\n\nmodel.colour = red\n";
  std::string msg;
  RunConfig c;
  EXPECT_EQ(code_of([&] { load_config_file(c, dir / "bad.cfg"); }, &msg),
            ErrorCode::kConfigError);
  EXPECT_NE(msg.find("bad.cfg:2"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { load_config_file(c, dir / "unknown.cfg"); }, &msg),
            ErrorCode::kConfigError);
  EXPECT_NE(msg.find("unknown.cfg:3"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { apply_setting(c, "gnn.backbone", "mlp"); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([&] { apply_setting(c, "train.epochs", "ten"); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([&] { parse_lr_schedule("0:0.1,0:0.2"); }), ErrorCode::kConfigError);
  RunConfig late;
  late.lr_schedule = parse_lr_schedule("5:0.1");
  EXPECT_EQ(code_of([&] { late.validate(); }), ErrorCode::kConfigError);
  RunConfig zero;
  zero.patterns = 0;
  EXPECT_EQ(code_of([&] { zero.validate(); }), ErrorCode::kConfigError);
}

TEST(Paths, FoldPlaceholder) {
  EXPECT_EQ(with_fold("runs/f{fold}/x{fold}", 3), fs::path("runs/f3/x3"));
  RunConfig c;
  c.output_dir = "out/{fold}";
  c.fold = 1;
  EXPECT_EQ(checkpoint_path(c), fs::path("out/1/checkpoint_best.bin"));
}

std::map<std::string, std::multiset<std::string>>
manifest_buckets(const fs::path &path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "drug1_id,drug2_id,ddi_type,label,split");
  std::map<std::string, std::multiset<std::string>> out;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out[line.substr(comma + 1)].insert(line.substr(0, comma));
  }
  return out;
}

TEST(Split, TransductiveManifest) {
  const auto dir = scratch("split_t");
  RunConfig c = small_run(dir);
  const json summary = cmd_split(c);
  const auto first = slurp(dir / "run" / "split_manifest.csv");
  cmd_split(c);
  EXPECT_EQ(first, slurp(dir / "run" / "split_manifest.csv"));

  const auto buckets = manifest_buckets(dir / "run" / "split_manifest.csv");
  ASSERT_EQ(buckets.size(), 3U);
  // 200 positives and 200 negatives; per-stratum rounding keeps 6:2:2 close.
  EXPECT_NEAR(static_cast<double>(buckets.at("train").size()), 240.0, 4.0);
  EXPECT_NEAR(static_cast<double>(buckets.at("valid").size()), 80.0, 4.0);
  EXPECT_NEAR(static_cast<double>(buckets.at("test").size()), 80.0, 4.0);
  EXPECT_EQ(summary["counts"]["train"].get<std::size_t>()
                + summary["counts"]["valid"].get<std::size_t>()
                + summary["counts"]["test"].get<std::size_t>(),
            400U);

  apply_setting(c, "run.fold", "1");
  apply_setting(c, "data.output_dir", (dir / "run_f1").string());
  cmd_split(c);
  EXPECT_NE(first, slurp(dir / "run_f1" / "split_manifest.csv"));
}

TEST(Split, InductiveGroups) {
  const auto dir = scratch("split_i");
  RunConfig c = small_run(dir);
  apply_setting(c, "run.mode", "inductive");
  const json summary = cmd_split(c);
  EXPECT_EQ(summary["new_drugs"], 4);  // round(0.2 * 20)
  EXPECT_EQ(summary["old_drugs"], 16);

  std::ifstream groups(dir / "run" / "drug_groups.csv");
  std::string line;
  std::getline(groups, line);
  std::set<std::string> fresh;
  while (std::getline(groups, line))
    if (line.ends_with(",new"))
      fresh.insert(line.substr(0, line.find(',')));
  ASSERT_EQ(fresh.size(), 4U);

  const auto buckets = manifest_buckets(dir / "run" / "split_manifest.csv");
  for (const auto &[name, rows]: buckets) {
    for (const auto &row: rows) {
      std::stringstream ss(row);
      std::string a, b;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      const int n_new = (fresh.contains(a) ? 1 : 0) + (fresh.contains(b) ? 1 : 0);
      if (name == "s1")
        EXPECT_EQ(n_new, 2) << row;
      else if (name == "s2")
        EXPECT_EQ(n_new, 1) << row;
      else
        EXPECT_EQ(n_new, 0) << name << ' ' << row;
    }
  }
}

TEST(Train, BitIdenticalReruns) {
  const auto dir = scratch("train_rerun");
  RunConfig c = small_run(dir);
  const json out = cmd_train(c, nullptr);
  EXPECT_EQ(out["epochs"], 2);
  const auto log1 = slurp(dir / "run" / "train_log.jsonl");
  const auto ckpt1 = slurp(dir / "run" / "checkpoint_final.bin");
  cmd_train(c, nullptr);
  EXPECT_EQ(log1, slurp(dir / "run" / "train_log.jsonl"));
  EXPECT_EQ(ckpt1, slurp(dir / "run" / "checkpoint_final.bin"));

  std::istringstream lines(log1);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    EXPECT_EQ(j["epoch"], n);
    EXPECT_TRUE(std::isfinite(j["loss"].get<double>()));
    EXPECT_TRUE(j["valid"].contains("auc"));
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST(Eval, DeterministicAndRoundTrip) {
  const auto dir = scratch("eval");
  RunConfig c = small_run(dir);
  apply_setting(c, "data.output_dir", (dir / "run_{fold}").string());
  for (int fold = 0; fold < 3; ++fold) {
    RunConfig f = c;
    apply_setting(f, "run.fold", std::to_string(fold));
    cmd_train(f, nullptr);
  }
  const json a = cmd_eval(c, "test", { 0, 1, 2 });
  const json b = cmd_eval(c, "test", { 0, 1, 2 });
  EXPECT_EQ(a.dump(), b.dump());
  ASSERT_EQ(a["folds"].size(), 3U);

  double sum = 0.0, sq = 0.0;
  for (const auto &f: a["folds"]) {
    const double acc = f["metrics"]["accuracy"];
    sum += acc;
    sq += acc * acc;
  }
  const double mean = sum / 3.0;
  EXPECT_NEAR(a["mean"]["accuracy"].get<double>(), mean, 1e-12);
  EXPECT_NEAR(a["std"]["accuracy"].get<double>(),
              std::sqrt(std::max(0.0, sq / 3.0 - mean * mean)), 1e-9);
  EXPECT_TRUE(fs::exists(dir / "run_1" / "metrics_test.json"));

  // Reloading the checkpoint reproduces the scores of an explicit path.
  RunConfig explicit_ckpt = c;
  apply_setting(explicit_ckpt, "data.checkpoint",
                (dir / "run_{fold}" / "checkpoint_best.bin").string());
  EXPECT_EQ(cmd_eval(explicit_ckpt, "test", { 0, 1, 2 })["mean"].dump(),
            a["mean"].dump());

  // A checkpoint from fold 0 is refused for fold 1.
  RunConfig wrong = c;
  apply_setting(wrong, "run.fold", "1");
  apply_setting(wrong, "data.checkpoint",
                (dir / "run_0" / "checkpoint_best.bin").string());
  EXPECT_EQ(code_of([&] { cmd_eval(wrong, "test", {}); }),
            ErrorCode::kIncompatibleCheckpoint);
}

TEST(Eval, SingleClassAucNote) {
  data::Metrics m;
  m.count = 3;
  const json j = metrics_json(m);
  EXPECT_TRUE(j["auc"].is_null());
  EXPECT_EQ(j["notes"], json::array({ "SingleClassAUC" }));
}

TEST(Checkpoint, IncompatibleConfigurations) {
  const auto dir = scratch("incompat");
  RunConfig c = small_run(dir);
  cmd_train(c, nullptr);
  const auto ds = load_dataset(c);
  EXPECT_NO_THROW(load_model(checkpoint_path(c), c, ds.types));

  RunConfig other = c;
  apply_setting(other, "gnn.dim", "16");
  EXPECT_EQ(code_of([&] { load_model(checkpoint_path(other), other, ds.types); }),
            ErrorCode::kIncompatibleCheckpoint);

  const auto wrong_types = data::TypeVocab::build({ "0", "1" });
  EXPECT_EQ(code_of([&] { load_model(checkpoint_path(c), c, wrong_types); }),
            ErrorCode::kIncompatibleCheckpoint);

  RunConfig inductive = c;
  apply_setting(inductive, "run.mode", "inductive");
  EXPECT_EQ(code_of([&] { cmd_eval(inductive, "s1", {}); }),
            ErrorCode::kIncompatibleCheckpoint);
}

TEST(PredictExplain, Contract) {
  const auto dir = scratch("explain");
  RunConfig c = small_run(dir);
  apply_setting(c, "explain.top_k", "5");
  cmd_train(c, nullptr);
  const auto ds = synthetic::make_dataset(0);
  const std::string d1 = ds.drugs[0].first, d2 = ds.drugs[1].first;

  const json p = cmd_predict(c, d1, d2, "1");
  const double logit = p["logit"];
  EXPECT_NEAR(p["probability"].get<double>(), 1.0 / (1.0 + std::exp(-logit)), 1e-12);

  const json e = cmd_explain(c, d1, d2, "1");
  EXPECT_EQ(e["logit"].get<double>(), logit);
  EXPECT_EQ(e["patterns"], 4);
  ASSERT_EQ(e["similarity"].size(), 4U);
  const auto &top = e["top_interactions"];
  ASSERT_EQ(top.size(), 5U);
  for (std::size_t r = 0; r < top.size(); ++r) {
    const double s = top[r]["score"];
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(top[r]["rank"], r + 1);
    const std::size_t i = top[r]["pattern_drug1"], j = top[r]["pattern_drug2"];
    EXPECT_EQ(e["similarity"][i][j].get<double>(), s);
    if (r > 0)
      EXPECT_LE(s, top[r - 1]["score"].get<double>());
  }
  // No unlisted cell beats the last listed one.
  const double last = top.back()["score"];
  std::size_t above = 0;
  for (const auto &row: e["similarity"])
    for (const auto &v: row)
      above += v.get<double>() > last ? 1 : 0;
  EXPECT_LE(above, 4U);

  for (const char *side: { "drug1", "drug2" }) {
    const auto &d = e[side];
    ASSERT_EQ(d["assignment"].size(), d["atoms"].size());
    for (const auto &a: d["assignment"])
      EXPECT_LT(a.get<std::size_t>(), 4U);
  }

  apply_setting(c, "explain.top_k", "100");
  EXPECT_EQ(cmd_explain(c, d1, d2, "1")["top_interactions"].size(), 16U);
  EXPECT_EQ(code_of([&] { cmd_explain(c, d1, "nope", "1"); }),
            ErrorCode::kUnknownDrugId);
  EXPECT_EQ(code_of([&] { cmd_explain(c, d1, d2, "99"); }), ErrorCode::kConfigError);
}

TEST(PredictExplain, AblatedModelCannotExplain) {
  const auto dir = scratch("ablated");
  RunConfig c = small_run(dir);
  apply_setting(c, "model.substructures", "false");
  cmd_train(c, nullptr);
  const auto ds = synthetic::make_dataset(0);
  EXPECT_NO_THROW(cmd_predict(c, ds.drugs[0].first, ds.drugs[1].first, "0"));
  EXPECT_EQ(code_of([&] { cmd_explain(c, ds.drugs[0].first, ds.drugs[1].first, "0"); }),
            ErrorCode::kConfigError);
}

struct CliResult {
  int status;
  std::string out, err;
};

CliResult run_cli(const std::string &args, const fs::path &dir) {
  const char *bin = std::getenv("MSAN_CLI");
  if (bin == nullptr)
    return { -1, "", "" };
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(bin) + " " + args + " >" + out.string()
                          + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  return { WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err) };
}

TEST(Binary, ExitCodesAndErrors) {
  if (std::getenv("MSAN_CLI") == nullptr)
    GTEST_SKIP() << "MSAN_CLI not set";
  const auto dir = scratch("binary");
  small_run(dir);
  const std::string data = "--drugs " + (dir / "drugs.csv").string() + " --pairs "
                           + (dir / "pairs.csv").string() + " --output-dir "
                           + (dir / "run").string();
  const std::string small = " --set train.epochs=1 --set model.patterns=3 "
                            "--set gnn.dim=8 --set gnn.layers=1";

  CliResult r = run_cli("split " + data, dir);
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(json::accept(r.out)) << r.out;

  r = run_cli("train " + data + small + " --backbone gcn --no-augment", dir);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["epochs"], 1);

  r = run_cli("eval --split valid " + data, dir);
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["split"], "valid");

  const auto ds = synthetic::make_dataset(0);
  r = run_cli("explain " + data + " --top-k 2 --drug1 " + ds.drugs[0].first
                  + " --drug2 " + ds.drugs[1].first + " --type 0",
              dir);
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["top_interactions"].size(), 2U);

  auto expect_error = [&](const std::string &args, const std::string &code) {
    const CliResult bad = run_cli(args, dir);
    EXPECT_NE(bad.status, 0) << args;
    EXPECT_EQ(std::count(bad.err.begin(), bad.err.end(), '\n'), 1) << bad.err;
    const json j = json::parse(bad.err);
    EXPECT_EQ(j["error"], code) << bad.err;
  };
  expect_error("predict " + data + " --drug1 " + ds.drugs[0].first
                   + " --drug2 missing --type 0",
               "UnknownDrugId");
  expect_error("train " + data + " --set train.epochs=0", "ConfigError");
  expect_error("train " + data + " --set colour=red", "ConfigError");
  expect_error("eval " + data + " --split test --backbone gat", "IncompatibleCheckpoint");
  expect_error("frobnicate", "UsageError");
  expect_error("split --drugs /nonexistent.csv --pairs /nonexistent.csv", "IoError");
}

}  // namespace
}  // namespace msan::cli
