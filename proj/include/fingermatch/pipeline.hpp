// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_PIPELINE_HPP
#define FINGERMATCH_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fingermatch/augment.hpp"
#include "fingermatch/config.hpp"
#include "fingermatch/dataset.hpp"
#include "fingermatch/io.hpp"
#include "fingermatch/metrics.hpp"
#include "fingermatch/network.hpp"
#include "fingermatch/trainer.hpp"

namespace fingermatch {

// Shared stage plumbing between the CLI subcommands, kept out of main so the
// composed pipeline and the stage-by-stage pipeline run the same code.

inline std::string entry_key(const ManifestEntry& e) {
  // Colon-separated so keys stay a single field inside comma-separated CSVs.
  return e.path + ":" + std::to_string(e.subject) + ":" +
         to_string(e.component) + ":" + std::to_string(e.index);
}

/// Gallery-side training pool: first train_per_subject samples per subject of
/// one component, augmented to the target pool size and resized to the
/// network input (resizes are logged by the caller via needs_resize).
template <typename T = float>
TrainPool<T> build_train_pool(const DatasetManifest& manifest,
                              const SplitProtocol& protocol,
                              Component component, const AugmentConfig& aug,
                              const NetworkConfig& net) {
  const auto entries = filter_component(manifest.entries, component);
  if (entries.empty())
    throw ProtocolError("manifest has no '" + to_string(component) +
                        "' entries");
  Split s = split(entries, protocol);
  std::map<int, std::vector<ImageSample>> by_subject;
  for (const auto& e : s.gallery)
    by_subject[e.subject].push_back(load_sample(manifest, e));
  TrainPool<T> pool;
  for (auto& [subject, originals] : by_subject) {
    for (const ImageSample& sample : augment_subject(originals, aug)) {
      pool.images.push_back(
          image_to_tensor(sample.image, net.input_height, net.input_width)
              .template cast<T>());
      pool.subjects.push_back(subject);
    }
  }
  return pool;
}

struct EmbeddedSet {
  std::vector<std::string> keys;
  std::vector<int> subjects;
  std::vector<std::vector<float>> embeddings;
};

inline EmbeddedSet embed_entries(const NetworkParams<float>& params,
                                 const DatasetManifest& manifest,
                                 const std::vector<ManifestEntry>& entries,
                                 int threads) {
  EmbeddedSet out;
  std::vector<Tensor<float>> images;
  images.reserve(entries.size());
  for (const auto& e : entries) {
    ImageSample s = load_sample(manifest, e);
    images.push_back(image_to_tensor(s.image, params.config.input_height,
                                     params.config.input_width));
    out.keys.push_back(entry_key(e));
    out.subjects.push_back(e.subject);
  }
  out.embeddings = forward(params, images, threads);
  return out;
}

inline std::vector<ScoreRow> cross_scores(const EmbeddedSet& gallery,
                                          const EmbeddedSet& probe) {
  std::vector<ScoreRow> rows;
  rows.reserve(gallery.keys.size() * probe.keys.size());
  for (std::size_t p = 0; p < probe.keys.size(); ++p)
    for (std::size_t g = 0; g < gallery.keys.size(); ++g)
      rows.push_back({probe.keys[p], gallery.keys[g],
                      probe.subjects[p] == gallery.subjects[g] ? 1 : 0,
                      match_score(probe.embeddings[p], gallery.embeddings[g])});
  return rows;
}

struct EvalOutput {
  EvalReport report;
  ROCCurve roc;
};

// Above this many pairs, scores are streamed into counting histograms
// instead of exact lists.
inline constexpr std::uint64_t kExactScoreCap = 1ull << 23;

inline EvalOutput evaluate_embedded(const EmbeddedSet& gallery,
                                    const EmbeddedSet& probe,
                                    const std::string& protocol_name,
                                    std::uint64_t parameter_count) {
  EvalOutput out;
  const std::uint64_t pairs =
      static_cast<std::uint64_t>(gallery.keys.size()) * probe.keys.size();
  PairCounts counts = pair_counts(gallery.subjects, probe.subjects);
  if (pairs <= kExactScoreCap) {
    ScoreSet ss = score_all_pairs(gallery.embeddings, gallery.subjects,
                                  probe.embeddings, probe.subjects);
    out.roc = compute_roc(ss);
    out.report.eer_percent = compute_eer(out.roc).eer_percent;
    out.report.di = compute_di(ss);
  } else {
    ScoreHistogram h =
        score_all_pairs_streaming(gallery.embeddings, gallery.subjects,
                                  probe.embeddings, probe.subjects);
    out.roc = compute_roc(h);
    out.report.eer_percent = compute_eer(out.roc).eer_percent;
    out.report.di = compute_di(h);
  }
  out.report.crr_percent = compute_crr(gallery.embeddings, gallery.subjects,
                                       probe.embeddings, probe.subjects);
  out.report.genuine_count = counts.genuine;
  out.report.impostor_count = counts.impostor;
  out.report.parameter_count = parameter_count;
  out.report.protocol = protocol_name;
  return out;
}

/// Evaluation from a score CSV (no CRR available without embeddings; the
/// caller decides whether to include it).
inline EvalOutput evaluate_scores(const std::vector<ScoreRow>& rows,
                                  const std::string& protocol_name) {
  ScoreSet ss;
  for (const auto& r : rows)
    (r.label == 1 ? ss.genuine : ss.impostor).push_back(r.score);
  EvalOutput out;
  out.roc = compute_roc(ss);
  out.report.eer_percent = compute_eer(out.roc).eer_percent;
  out.report.di = compute_di(ss);
  out.report.crr_percent = -1.0;  // unknown from scores alone
  out.report.genuine_count = ss.genuine.size();
  out.report.impostor_count = ss.impostor.size();
  out.report.protocol = protocol_name;
  return out;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_PIPELINE_HPP
