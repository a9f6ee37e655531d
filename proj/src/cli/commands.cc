//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/cli/commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>

#include "msan/checkpoint.h"
#include "msan/error.h"
#include "msan/tensor.h"

namespace msan::cli {
namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path &path) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

void write_json(const std::filesystem::path &path, const json &value) {
  auto out = open_output(path);
  out << value.dump(2) << '\n';
  if (!out)
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

int type_id(const data::TypeVocab &types, const std::string &label) {
  const auto id = types.find(label);
  if (!id)
    throw Error(ErrorCode::kConfigError, "unknown DDI type '" + label + "'");
  return *id;
}

[[noreturn]] void incompatible(const std::string &what) {
  throw Error(ErrorCode::kIncompatibleCheckpoint, what);
}

json fold_stats(const std::vector<data::Metrics> &runs, bool want_std) {
  json out;
  auto put = [&](const char *name, auto get) {
    std::vector<double> xs;
    for (const auto &m: runs)
      if (auto v = get(m))
        xs.push_back(*v);
    if (xs.empty()) {
      out[name] = nullptr;
      return;
    }
    double mean = 0.0;
    for (double x: xs)
      mean += x;
    mean /= static_cast<double>(xs.size());
    if (!want_std) {
      out[name] = mean;
      return;
    }
    double var = 0.0;
    for (double x: xs)
      var += (x - mean) * (x - mean);
    out[name] = std::sqrt(var / static_cast<double>(xs.size()));
  };
  using Opt = std::optional<double>;
  put("accuracy", [](const data::Metrics &m) -> Opt { return m.accuracy; });
  put("auc", [](const data::Metrics &m) -> Opt { return m.auc; });
  put("f1", [](const data::Metrics &m) -> Opt { return m.f1; });
  put("precision", [](const data::Metrics &m) -> Opt { return m.precision; });
  put("recall", [](const data::Metrics &m) -> Opt { return m.recall; });
  return out;
}

// Pool of old drugs for inductive scoring, read from or written to the
// fingerprint cache in the output dir.
std::vector<fingerprint::Fingerprint>
cached_fingerprints(const RunConfig &config, const data::DrugTable &drugs) {
  const auto dir = with_fold(config.output_dir, config.fold);
  const auto path = dir / "fingerprints.tsv";
  if (std::filesystem::exists(path)) {
    const auto entries = fingerprint::read_cache(path, config.fp_radius);
    bool usable = entries.size() == drugs.size();
    for (std::size_t i = 0; usable && i < drugs.size(); ++i)
      usable = entries[i].drug_id == drugs[i].id
               && entries[i].fp.width() == config.fp_width;
    if (usable) {
      std::vector<fingerprint::Fingerprint> fps;
      for (const auto &e: entries)
        fps.push_back(e.fp);
      return fps;
    }
  }
  auto fps = drug_fingerprints(drugs, config.fp_radius, config.fp_width);
  std::vector<fingerprint::PoolEntry> entries;
  for (std::size_t i = 0; i < drugs.size(); ++i)
    entries.push_back({ drugs[i].id, fps[i] });
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  fingerprint::write_cache(path, entries);
  return fps;
}

}  // namespace

std::filesystem::path with_fold(const std::filesystem::path &path, int fold) {
  std::string s = path.string();
  const std::string key = "{fold}";
  for (auto pos = s.find(key); pos != std::string::npos;
       pos = s.find(key, pos))
    s.replace(pos, key.size(), std::to_string(fold));
  return s;
}

std::filesystem::path checkpoint_path(const RunConfig &config) {
  if (!config.checkpoint.empty())
    return with_fold(config.checkpoint, config.fold);
  return with_fold(config.output_dir, config.fold) / "checkpoint_best.bin";
}

json checkpoint_header(const RunConfig &config, const model::ModelConfig &m,
                       const data::TypeVocab &types) {
  return {
    { "model",
      { { "backbone", gnn::backbone_name(m.gnn.backbone) },
        { "layers", m.gnn.layers },
        { "dim", m.gnn.dim },
        { "heads", m.gnn.heads },
        { "patterns", m.patterns },
        { "substructures", m.use_substructures },
        { "num_types", m.num_types },
        { "feature_dim", m.input_dim() } } },
    { "types", types.labels() },
    { "mode", config.inductive ? "inductive" : "transductive" },
    { "seed", config.seed },
    { "fold", config.fold },
  };
}

model::MsanModel load_model(const std::filesystem::path &path,
                            const RunConfig &config,
                            const data::TypeVocab &types, json *header_out) {
  const auto loaded = checkpoint::load(path);
  const json &h = loaded.header;
  model::ModelConfig mc;
  try {
    const json &m = h.at("model");
    mc.gnn.backbone = gnn::parse_backbone(m.at("backbone").get<std::string>());
    mc.gnn.layers = m.at("layers").get<int>();
    mc.gnn.dim = m.at("dim").get<int>();
    mc.gnn.heads = m.at("heads").get<int>();
    mc.patterns = m.at("patterns").get<int>();
    mc.use_substructures = m.at("substructures").get<bool>();
    mc.num_types = m.at("num_types").get<int>();
    if (m.at("feature_dim").get<std::size_t>() != chem::kFeatureDim)
      incompatible(path.string() + ": atom feature width differs");
    if (h.at("types").get<std::vector<std::string>>() != types.labels())
      incompatible(path.string()
                   + ": DDI type vocabulary differs from the dataset");
  } catch (const nlohmann::json::exception &e) {
    incompatible(path.string() + ": malformed header: " + e.what());
  }

  auto clash = [&](const char *key, bool differs) {
    if (config.explicit_keys.count(key) != 0 && differs)
      incompatible(path.string() + ": configured " + key
                   + " differs from the checkpoint");
  };
  clash("gnn.backbone", config.gnn.backbone != mc.gnn.backbone);
  clash("gnn.layers", config.gnn.layers != mc.gnn.layers);
  clash("gnn.dim", config.gnn.dim != mc.gnn.dim);
  clash("gnn.heads", config.gnn.heads != mc.gnn.heads);
  clash("model.patterns", config.patterns != mc.patterns);
  clash("model.substructures",
        config.use_substructures != mc.use_substructures);

  model::MsanModel model(mc, 0);
  checkpoint::restore(model.params(), loaded);
  if (header_out != nullptr)
    *header_out = h;
  return model;
}

json metrics_json(const data::Metrics &m) {
  json out = {
    { "count", m.count },
    { "accuracy", m.accuracy },
    { "auc", m.auc ? json(*m.auc) : json(nullptr) },
    { "f1", m.f1 },
    { "precision", m.precision },
    { "recall", m.recall },
  };
  if (!m.auc)
    out["notes"] = json::array({ "SingleClassAUC" });
  return out;
}

json cmd_split(const RunConfig &config) {
  config.validate();
  const Dataset ds = load_dataset(config);
  const Partition p = make_partition(ds, config.inductive,
                                     config.effective_seed());
  const auto dir = with_fold(config.output_dir, config.fold);

  const auto manifest = dir / "split_manifest.csv";
  auto out = open_output(manifest);
  out << "drug1_id,drug2_id,ddi_type,label,split\n";
  json counts = json::object();
  for (auto name: p.bucket_names()) {
    const auto &rows = p.bucket(name);
    counts[std::string(name)] = rows.size();
    for (const auto &s: rows)
      out << ds.drugs[s.drug1].id << ',' << ds.drugs[s.drug2].id << ','
          << ds.types.label(static_cast<std::size_t>(s.type)) << ','
          << s.label << ',' << name << '\n';
  }
  if (!out)
    throw Error(ErrorCode::kIoError, "write failed for " + manifest.string());

  json summary = {
    { "mode", config.inductive ? "inductive" : "transductive" },
    { "manifest", manifest.string() },
    { "counts", counts },
  };
  if (config.inductive) {
    const auto groups = dir / "drug_groups.csv";
    auto g = open_output(groups);
    g << "drug_id,group\n";
    std::size_t n_new = 0;
    for (std::size_t i = 0; i < ds.drugs.size(); ++i) {
      g << ds.drugs[i].id << ',' << (p.is_new[i] ? "new" : "old") << '\n';
      n_new += p.is_new[i] ? 1 : 0;
    }
    summary["drug_groups"] = groups.string();
    summary["new_drugs"] = n_new;
    summary["old_drugs"] = ds.drugs.size() - n_new;
  }
  return summary;
}

json cmd_train(const RunConfig &config, std::ostream *progress) {
  config.validate();
  const Dataset ds = load_dataset(config);
  const Partition p = make_partition(ds, config.inductive,
                                     config.effective_seed());
  const auto mc = model_config(config, ds.types.size());
  model::MsanModel model(mc, config.effective_seed());

  const auto dir = with_fold(config.output_dir, config.fold);
  const auto best_path = dir / "checkpoint_best.bin";
  const auto final_path = dir / "checkpoint_final.bin";
  auto log = open_output(dir / "train_log.jsonl");
  const json base = checkpoint_header(config, mc, ds.types);

  double best_score = -1.0;
  int best_epoch = -1;
  double last_loss = 0.0;
  train_model(
      model, ds.drugs, p.train, p.valid, config,
      [&](const EpochLog &e, model::MsanModel &m) {
        last_loss = e.loss;
        const json line = { { "epoch", e.epoch },
                            { "lr", e.lr },
                            { "loss", e.loss },
                            { "valid", metrics_json(e.valid) } };
        log << line.dump() << '\n';
        log.flush();
        const double score = e.valid.auc.value_or(e.valid.accuracy);
        if (score > best_score) {
          best_score = score;
          best_epoch = e.epoch;
          json h = base;
          h["epoch"] = e.epoch;
          h["kind"] = "best";
          checkpoint::save(best_path, m.params(), h);
        }
        if (progress != nullptr) {
          std::ostringstream msg;
          msg << "epoch " << (e.epoch + 1) << '/' << config.epochs
              << " lr " << e.lr << " loss " << std::fixed
              << std::setprecision(4) << e.loss << " valid_acc "
              << e.valid.accuracy;
          if (e.valid.auc)
            msg << " valid_auc " << *e.valid.auc;
          *progress << msg.str() << '\n';
        }
      });

  json h = base;
  h["epoch"] = config.epochs - 1;
  h["kind"] = "final";
  checkpoint::save(final_path, model.params(), h);
  return {
    { "output_dir", dir.string() },
    { "epochs", config.epochs },
    { "train_samples", p.train.size() },
    { "valid_samples", p.valid.size() },
    { "final_loss", last_loss },
    { "best_epoch", best_epoch },
    { "best_valid_score", best_score },
    { "checkpoints",
      { { "best", best_path.string() }, { "final", final_path.string() } } },
  };
}

json cmd_eval(const RunConfig &config, const std::string &split,
              const std::vector<int> &folds) {
  config.validate();
  std::vector<int> fold_list = folds.empty() ? std::vector<int> { config.fold }
                                             : folds;
  json per_fold = json::array();
  std::vector<data::Metrics> runs;
  bool single_class = false;
  for (int fold: fold_list) {
    RunConfig cfg = config;
    cfg.fold = fold;
    cfg.output_dir = with_fold(config.output_dir, fold);
    const Dataset ds = load_dataset(cfg);
    const Partition p = make_partition(ds, cfg.inductive, cfg.effective_seed());
    const auto ckpt = checkpoint_path(cfg);
    json header;
    model::MsanModel model = load_model(ckpt, cfg, ds.types, &header);
    if (header.value("mode", "") != (cfg.inductive ? "inductive" : "transductive"))
      incompatible(ckpt.string() + ": checkpoint was trained in "
                   + header.value("mode", std::string("unknown")) + " mode");
    if (header.value("seed", std::uint64_t { 0 }) + static_cast<std::uint64_t>(
            header.value("fold", 0))
        != cfg.effective_seed())
      incompatible(ckpt.string() + ": checkpoint belongs to another fold");

    const auto &samples = p.bucket(split);
    Scorer scorer(model, ds.drugs);
    std::vector<double> scores;
    if (cfg.inductive && (split == "s1" || split == "s2")) {
      const auto fps = cached_fingerprints(cfg, ds.drugs);
      scores = score_inductive(scorer, ds.drugs, fps, p.is_new, samples);
    } else {
      scores = score_samples(scorer, samples);
    }
    std::vector<int> labels;
    for (const auto &s: samples)
      labels.push_back(s.label);
    const data::Metrics m = data::compute_metrics(scores, labels);
    single_class = single_class || !m.auc;
    runs.push_back(m);
    const json entry = { { "fold", fold },
                         { "checkpoint", ckpt.string() },
                         { "metrics", metrics_json(m) } };
    write_json(cfg.output_dir / ("metrics_" + split + ".json"), entry);
    per_fold.push_back(entry);
  }
  json out = {
    { "split", split },
    { "mode", config.inductive ? "inductive" : "transductive" },
    { "folds", per_fold },
    { "mean", fold_stats(runs, false) },
    { "std", fold_stats(runs, true) },
  };
  if (single_class)
    out["notes"] = json::array({ "SingleClassAUC" });
  return out;
}

json cmd_predict(const RunConfig &config, const std::string &drug1,
                 const std::string &drug2, const std::string &type) {
  config.validate();
  const Dataset ds = load_dataset(config);
  const std::size_t d1 = ds.drugs.index_of(drug1);
  const std::size_t d2 = ds.drugs.index_of(drug2);
  const int t = type_id(ds.types, type);
  model::MsanModel model = load_model(checkpoint_path(config), config, ds.types);
  Scorer scorer(model, ds.drugs);
  const double logit = scorer.logit(d1, d2, t);
  json out = {
    { "drug1", drug1 },
    { "drug2", drug2 },
    { "type", type },
    { "logit", logit },
    { "probability", tensor::sigmoid(logit) },
  };
  if (config.inductive) {
    const Partition p = make_partition(ds, true, config.effective_seed());
    const auto fps = cached_fingerprints(config, ds.drugs);
    const data::DdiSample s { d1, d2, t, 1 };
    out["inductive_score"] =
        score_inductive(scorer, ds.drugs, fps, p.is_new, std::span(&s, 1))[0];
  }
  return out;
}

json cmd_explain(const RunConfig &config, const std::string &drug1,
                 const std::string &drug2, const std::string &type) {
  config.validate();
  const Dataset ds = load_dataset(config);
  const std::size_t d1 = ds.drugs.index_of(drug1);
  const std::size_t d2 = ds.drugs.index_of(drug2);
  const int t = type_id(ds.types, type);
  model::MsanModel model = load_model(checkpoint_path(config), config, ds.types);
  if (!model.config().use_substructures)
    throw Error(ErrorCode::kConfigError,
                "explain needs a model with substructure modules");

  Scorer scorer(model, ds.drugs);
  const double logit = scorer.logit(d1, d2, t);
  const Matrix s = scorer.similarity(d1, d2);

  struct Cell {
    std::size_t i, j;
    double score;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      cells.push_back({ i, j, s(i, j) });
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell &a, const Cell &b) {
                     if (a.score != b.score)
                       return a.score > b.score;
                     return std::pair(a.i, a.j) < std::pair(b.i, b.j);
                   });
  const std::size_t k =
      std::min(cells.size(), static_cast<std::size_t>(config.top_k));
  json top = json::array();
  for (std::size_t r = 0; r < k; ++r)
    top.push_back({ { "rank", r + 1 },
                    { "pattern_drug1", cells[r].i },
                    { "pattern_drug2", cells[r].j },
                    { "score", cells[r].score } });

  json sim = json::array();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    sim.push_back(std::vector<double>(row.begin(), row.end()));
  }

  auto drug_json = [&](std::size_t d) {
    const auto &graph = ds.drugs[d].graph;
    std::vector<std::string> elements;
    for (const auto &a: graph.atoms)
      elements.push_back(a.element);
    return json {
      { "id", ds.drugs[d].id },
      { "smiles", ds.drugs[d].smiles },
      { "atoms", elements },
      { "assignment", model.assignment_for(graph).pattern_of_atom },
    };
  };

  return {
    { "drug1", drug_json(d1) },
    { "drug2", drug_json(d2) },
    { "type", type },
    { "logit", logit },
    { "probability", tensor::sigmoid(logit) },
    { "patterns", model.config().patterns },
    { "similarity", sim },
    { "top_interactions", top },
  };
}

}  // namespace msan::cli
