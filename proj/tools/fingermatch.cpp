// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line front end: synth, train, embed, match, eval, fuse.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fingermatch/checkpoint.hpp"
#include "fingermatch/config.hpp"
#include "fingermatch/fusion.hpp"
#include "fingermatch/pipeline.hpp"
#include "fingermatch/synth.hpp"

namespace fm = fingermatch;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (key=value)");
  cmd->add_option("--seed", flags.seed, "RNG seed (overrides config)");
  cmd->add_option("--threads", flags.threads, "worker thread cap");
  cmd->add_flag("--print-config", flags.print_config,
                "print the effective config and exit");
}

// Builds the effective config: defaults, then file, then flags.
fm::RunConfig make_config(const CommonFlags& flags,
                          const std::map<std::string, std::string>& overrides) {
  fm::RunConfig cfg;
  if (!flags.config_path.empty()) cfg.load_file(flags.config_path);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  if (flags.seed) cfg.set("seed", std::to_string(*flags.seed));
  if (flags.threads) cfg.set("threads", std::to_string(*flags.threads));
  return cfg;
}

void log_run(const fm::RunConfig& cfg, std::uint64_t parameter_count) {
  std::cerr << "run: seed=" << cfg.get("seed") << " config_hash="
            << std::hex << cfg.hash() << std::dec
            << " parameter_count=" << parameter_count << "\n";
}

int run_synth(const CommonFlags& flags,
              const std::map<std::string, std::string>& overrides,
              const std::string& out_dir) {
  fm::RunConfig cfg = make_config(flags, overrides);
  if (flags.print_config) {
    std::cout << cfg.dump();
    return 0;
  }
  log_run(cfg, 0);
  fm::DatasetManifest m = fm::generate_synthetic(cfg.synth(), out_dir);
  std::cout << "wrote " << m.entries.size() << " images under " << out_dir
            << "\n";
  return 0;
}

int run_train(const CommonFlags& flags,
              const std::map<std::string, std::string>& overrides,
              const std::string& manifest_path, const std::string& out_path,
              const std::string& trace_path, int checkpoint_every) {
  fm::RunConfig cfg = make_config(flags, overrides);
  if (flags.print_config) {
    std::cout << cfg.dump();
    return 0;
  }
  const fm::NetworkConfig net = cfg.network();
  const fm::TrainConfig train_cfg = cfg.trainer();
  fm::DatasetManifest manifest = fm::load_manifest(manifest_path);
  fm::TrainPool<float> pool = fm::build_train_pool<float>(
      manifest, cfg.protocol(), cfg.protocol_component(), cfg.augment(), net);
  {
    // parameter count is logged before the (long) training run starts
    fm::NetworkParams<float> probe =
        fm::build_network<float>(net, train_cfg.seed);
    log_run(cfg, fm::count_parameters(probe));
  }
  auto callback = [&](int epoch, const fm::NetworkParams<float>& params) {
    if (checkpoint_every > 0 && epoch % checkpoint_every == 0)
      fm::save_checkpoint(params, out_path + ".epoch" + std::to_string(epoch));
  };
  fm::TrainResult<float> result =
      fm::train<float>(pool, net, train_cfg, callback);
  fm::save_checkpoint(result.params, out_path);
  if (!trace_path.empty()) fm::save_loss_trace(result.trace, trace_path);
  std::cout << "trained " << result.trace.size() << " iterations; checkpoint "
            << out_path << "\n";
  return 0;
}

enum class Side { kGallery, kProbe, kAll };

std::vector<fm::ManifestEntry> select_entries(const fm::DatasetManifest& m,
                                              const fm::SplitProtocol& protocol,
                                              fm::Component component,
                                              Side side) {
  auto entries = fm::filter_component(m.entries, component);
  if (entries.empty())
    throw fm::ProtocolError("manifest has no '" + fm::to_string(component) +
                            "' entries");
  if (side == Side::kAll) return entries;
  fm::Split s = fm::split(entries, protocol);
  return side == Side::kGallery ? s.gallery : s.probe;
}

int run_embed(const CommonFlags& flags,
              const std::map<std::string, std::string>& overrides,
              const std::string& checkpoint_path,
              const std::string& manifest_path, const std::string& out_path,
              const std::string& side_name) {
  fm::RunConfig cfg = make_config(flags, overrides);
  if (flags.print_config) {
    std::cout << cfg.dump();
    return 0;
  }
  fm::NetworkParams<float> params = fm::load_checkpoint(checkpoint_path);
  log_run(cfg, fm::count_parameters(params));
  Side side = side_name == "gallery" ? Side::kGallery
              : side_name == "probe" ? Side::kProbe
                                     : Side::kAll;
  fm::DatasetManifest manifest = fm::load_manifest(manifest_path);
  auto entries = select_entries(manifest, cfg.protocol(),
                                cfg.protocol_component(), side);
  fm::EmbeddedSet set =
      fm::embed_entries(params, manifest, entries, cfg.get_int("threads"));
  fm::save_embeddings(set.keys, set.embeddings, out_path);
  std::cout << "wrote " << set.keys.size() << " embeddings to " << out_path
            << "\n";
  return 0;
}

int run_match(const CommonFlags& flags,
              const std::map<std::string, std::string>& overrides,
              const std::string& checkpoint_path,
              const std::string& manifest_path, const std::string& out_path) {
  fm::RunConfig cfg = make_config(flags, overrides);
  if (flags.print_config) {
    std::cout << cfg.dump();
    return 0;
  }
  fm::NetworkParams<float> params = fm::load_checkpoint(checkpoint_path);
  log_run(cfg, fm::count_parameters(params));
  fm::DatasetManifest manifest = fm::load_manifest(manifest_path);
  const int threads = cfg.get_int("threads");
  auto gallery_entries = select_entries(manifest, cfg.protocol(),
                                        cfg.protocol_component(),
                                        Side::kGallery);
  auto probe_entries = select_entries(manifest, cfg.protocol(),
                                      cfg.protocol_component(), Side::kProbe);
  fm::EmbeddedSet gallery =
      fm::embed_entries(params, manifest, gallery_entries, threads);
  fm::EmbeddedSet probe =
      fm::embed_entries(params, manifest, probe_entries, threads);
  fm::save_scores(fm::cross_scores(gallery, probe), out_path);
  std::cout << "wrote " << gallery.keys.size() * probe.keys.size()
            << " scores to " << out_path << "\n";
  return 0;
}

int run_eval(const CommonFlags& flags,
             const std::map<std::string, std::string>& overrides,
             const std::string& checkpoint_path,
             const std::string& manifest_path, const std::string& scores_path,
             const std::string& report_path, const std::string& roc_path) {
  fm::RunConfig cfg = make_config(flags, overrides);
  if (flags.print_config) {
    std::cout << cfg.dump();
    return 0;
  }
  fm::EvalOutput out;
  if (!scores_path.empty()) {
    log_run(cfg, 0);
    out = fm::evaluate_scores(fm::load_scores(scores_path),
                              cfg.protocol().name);
  } else {
    if (checkpoint_path.empty() || manifest_path.empty())
      throw fm::ConfigError("eval needs --scores or --checkpoint + --manifest");
    fm::NetworkParams<float> params = fm::load_checkpoint(checkpoint_path);
    log_run(cfg, fm::count_parameters(params));
    fm::DatasetManifest manifest = fm::load_manifest(manifest_path);
    const int threads = cfg.get_int("threads");
    auto gallery_entries = select_entries(manifest, cfg.protocol(),
                                          cfg.protocol_component(),
                                          Side::kGallery);
    auto probe_entries = select_entries(manifest, cfg.protocol(),
                                        cfg.protocol_component(), Side::kProbe);
    fm::EmbeddedSet gallery =
        fm::embed_entries(params, manifest, gallery_entries, threads);
    fm::EmbeddedSet probe =
        fm::embed_entries(params, manifest, probe_entries, threads);
    out = fm::evaluate_embedded(gallery, probe, cfg.protocol().name,
                                fm::count_parameters(params));
  }
  fm::emit_report(out.report, out.roc, report_path, roc_path);
  std::cout << fm::report_to_json(out.report).dump(2) << "\n";
  return 0;
}

fm::AlignedScores align_score_files(const std::vector<std::string>& paths) {
  fm::AlignedScores aligned;
  std::vector<std::vector<fm::ScoreRow>> files;
  for (const auto& p : paths) files.push_back(fm::load_scores(p));
  const auto& ref = files.front();
  for (std::size_t f = 1; f < files.size(); ++f) {
    if (files[f].size() != ref.size())
      throw fm::AlignmentError("score files have different pair counts");
    for (std::size_t i = 0; i < ref.size(); ++i) {
      // modality files carry different image paths; alignment is positional
      // with matching genuine/impostor labeling
      if (files[f][i].label != ref[i].label)
        throw fm::AlignmentError("label mismatch at row " + std::to_string(i));
    }
  }
  for (std::size_t f = 0; f < files.size(); ++f) {
    aligned.modalities.push_back(paths[f]);
    std::vector<double> s;
    s.reserve(files[f].size());
    for (const auto& r : files[f]) s.push_back(r.score);
    aligned.scores.push_back(std::move(s));
  }
  for (const auto& r : ref) aligned.labels.push_back(r.label);
  return aligned;
}

int run_fuse(const CommonFlags& flags,
             const std::map<std::string, std::string>& overrides,
             const std::vector<std::string>& score_paths,
             const std::string& weights_csv, bool search, double grid_step,
             const std::string& out_path, const std::string& report_path) {
  fm::RunConfig cfg = make_config(flags, overrides);
  if (flags.print_config) {
    std::cout << cfg.dump();
    return 0;
  }
  log_run(cfg, 0);
  if (score_paths.size() < 2)
    throw fm::ConfigError("fuse needs at least 2 score files");
  fm::AlignedScores aligned = align_score_files(score_paths);
  fm::FusionWeights weights;
  double val_eer = -1.0, val_di = 0.0;
  if (search) {
    fm::WeightSearchResult r = fm::select_weights(aligned, grid_step);
    weights = r.weights;
    val_eer = r.eer_percent;
    val_di = r.di;
  } else {
    if (weights_csv.empty())
      throw fm::ConfigError("fuse needs --weights or --search");
    std::istringstream is(weights_csv);
    std::string tok;
    while (std::getline(is, tok, ','))
      weights.weights.push_back(fm::parse_double(tok, "--weights"));
  }
  std::vector<double> fused = fm::fuse(aligned, weights);
  const auto ref = fm::load_scores(score_paths.front());
  std::vector<fm::ScoreRow> rows;
  rows.reserve(fused.size());
  for (std::size_t i = 0; i < fused.size(); ++i)
    rows.push_back({ref[i].probe, ref[i].gallery, ref[i].label, fused[i]});
  fm::save_scores(rows, out_path);
  fm::ScoreSet ss = fm::to_score_set(fused, aligned.labels);
  nlohmann::ordered_json j;
  j["modalities"] = aligned.modalities;
  j["weights"] = weights.weights;
  j["fused_eer_percent"] = fm::compute_eer(fm::compute_roc(ss)).eer_percent;
  j["fused_di"] = fm::compute_di(ss);
  if (val_eer >= 0.0) {
    j["search_validation_eer_percent"] = val_eer;
    j["search_validation_di"] = val_di;
  }
  std::ofstream os(report_path);
  if (!os) throw fm::IoError("cannot write report: " + report_path);
  os << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"full-finger / knuckle embedding matcher"};
  app.require_subcommand(1);

  std::map<std::string, std::string> overrides;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  CommonFlags synth_flags;
  add_common(synth, synth_flags);
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  std::optional<int> synth_ids, synth_samples, synth_h, synth_w;
  synth->add_option("--identities", synth_ids);
  synth->add_option("--samples", synth_samples);
  synth->add_option("--height", synth_h);
  synth->add_option("--width", synth_w);

  // train
  auto* train = app.add_subcommand("train", "train an embedding network");
  CommonFlags train_flags;
  add_common(train, train_flags);
  std::string train_manifest, train_out = "checkpoint.fmck", train_trace;
  int checkpoint_every = 0;
  std::optional<int> train_epochs;
  std::optional<std::string> train_component;
  train->add_option("--manifest", train_manifest)->required();
  train->add_option("--out", train_out, "output checkpoint path");
  train->add_option("--trace", train_trace, "loss trace CSV path");
  train->add_option("--checkpoint-every", checkpoint_every,
                    "save every N epochs");
  train->add_option("--epochs", train_epochs);
  train->add_option("--component", train_component);

  // embed
  auto* embed = app.add_subcommand("embed", "write embeddings as CSV");
  CommonFlags embed_flags;
  add_common(embed, embed_flags);
  std::string embed_ckpt, embed_manifest, embed_out, embed_side = "all";
  std::optional<std::string> embed_component;
  embed->add_option("--checkpoint", embed_ckpt)->required();
  embed->add_option("--manifest", embed_manifest)->required();
  embed->add_option("--out", embed_out)->required();
  embed->add_option("--side", embed_side, "gallery|probe|all");
  embed->add_option("--component", embed_component);

  // match
  auto* match = app.add_subcommand("match", "embed and score all pairs");
  CommonFlags match_flags;
  add_common(match, match_flags);
  std::string match_ckpt, match_manifest, match_out;
  std::optional<std::string> match_component;
  match->add_option("--checkpoint", match_ckpt)->required();
  match->add_option("--manifest", match_manifest)->required();
  match->add_option("--out", match_out)->required();
  match->add_option("--component", match_component);

  // eval
  auto* eval = app.add_subcommand("eval", "compute EER/CRR/DI and ROC");
  CommonFlags eval_flags;
  add_common(eval, eval_flags);
  std::string eval_ckpt, eval_manifest, eval_scores;
  std::string eval_report = "report.json", eval_roc = "roc.csv";
  std::optional<std::string> eval_component;
  eval->add_option("--checkpoint", eval_ckpt);
  eval->add_option("--manifest", eval_manifest);
  eval->add_option("--scores", eval_scores, "score CSV instead of end-to-end");
  eval->add_option("--report", eval_report);
  eval->add_option("--roc", eval_roc);
  eval->add_option("--component", eval_component);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "weighted-sum score fusion");
  CommonFlags fuse_flags;
  add_common(fuse, fuse_flags);
  std::vector<std::string> fuse_inputs;
  std::string fuse_weights, fuse_out = "fused.csv",
              fuse_report = "fusion.json";
  bool fuse_search = false;
  double fuse_grid = 0.05;
  fuse->add_option("scores", fuse_inputs, "aligned score CSVs (>=2)")
      ->required();
  fuse->add_option("--weights", fuse_weights, "fixed weights, e.g. 0.5,0.5");
  fuse->add_flag("--search", fuse_search, "grid-search weights");
  fuse->add_option("--grid-step", fuse_grid);
  fuse->add_option("--out", fuse_out);
  fuse->add_option("--report", fuse_report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      if (synth_ids) overrides["synth.identities"] = std::to_string(*synth_ids);
      if (synth_samples)
        overrides["synth.samples"] = std::to_string(*synth_samples);
      if (synth_h) overrides["synth.height"] = std::to_string(*synth_h);
      if (synth_w) overrides["synth.width"] = std::to_string(*synth_w);
      return run_synth(synth_flags, overrides, synth_out);
    }
    if (train->parsed()) {
      if (train_epochs) overrides["train.epochs"] = std::to_string(*train_epochs);
      if (train_component) overrides["protocol.component"] = *train_component;
      return run_train(train_flags, overrides, train_manifest, train_out,
                       train_trace, checkpoint_every);
    }
    if (embed->parsed()) {
      if (embed_component) overrides["protocol.component"] = *embed_component;
      return run_embed(embed_flags, overrides, embed_ckpt, embed_manifest,
                       embed_out, embed_side);
    }
    if (match->parsed()) {
      if (match_component) overrides["protocol.component"] = *match_component;
      return run_match(match_flags, overrides, match_ckpt, match_manifest,
                       match_out);
    }
    if (eval->parsed()) {
      if (eval_component) overrides["protocol.component"] = *eval_component;
      return run_eval(eval_flags, overrides, eval_ckpt, eval_manifest,
                      eval_scores, eval_report, eval_roc);
    }
    if (fuse->parsed()) {
      return run_fuse(fuse_flags, overrides, fuse_inputs, fuse_weights,
                      fuse_search, fuse_grid, fuse_out, fuse_report);
    }
  } catch (const fm::Error& e) {
    std::cerr << e.error_class() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal-error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
