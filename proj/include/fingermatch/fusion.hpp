// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_FUSION_HPP
#define FINGERMATCH_FUSION_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fingermatch/errors.hpp"
#include "fingermatch/metrics.hpp"

namespace fingermatch {

/// Per-modality score lists over the identical ordered pair list: entry i of
/// every modality refers to the same (probe, gallery) pair.
struct AlignedScores {
  std::vector<std::string> modalities;
  std::vector<std::vector<double>> scores;  // [modality][pair]
  std::vector<int> labels;                  // 1 = genuine, shared by all
};

inline void check_aligned(const AlignedScores& a) {
  if (a.modalities.size() < 1 || a.modalities.size() != a.scores.size())
    throw AlignmentError("modality name/score list mismatch");
  for (const auto& s : a.scores)
    if (s.size() != a.labels.size())
      throw AlignmentError("modality score length differs from label length");
}

struct FusionWeights {
  std::vector<double> weights;  // per modality, >= 0, summing to 1
};

struct MinMax {
  double lo = 0.0, hi = 1.0;
};

inline MinMax score_range(const std::vector<double>& scores) {
  auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*hi <= *lo)
    throw NormalizationError("constant scores cannot be min-max normalized");
  return {*lo, *hi};
}

/// Min-max normalization with explicit (frozen) statistics.
inline std::vector<double> normalize_scores(const std::vector<double>& scores,
                                            const MinMax& mm) {
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    out[i] = (scores[i] - mm.lo) / (mm.hi - mm.lo);
  return out;
}

inline ScoreSet to_score_set(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
  ScoreSet out;
  for (std::size_t i = 0; i < scores.size(); ++i)
    (labels[i] == 1 ? out.genuine : out.impostor).push_back(scores[i]);
  return out;
}

inline ScoreSet normalize_scores(const ScoreSet& scores) {
  if (scores.genuine.empty() || scores.impostor.empty())
    throw NormalizationError("normalization needs nonempty score lists");
  std::vector<double> all = scores.genuine;
  all.insert(all.end(), scores.impostor.begin(), scores.impostor.end());
  MinMax mm = score_range(all);
  ScoreSet out;
  out.genuine = normalize_scores(scores.genuine, mm);
  out.impostor = normalize_scores(scores.impostor, mm);
  return out;
}

/// Weighted-sum fusion of min-max-normalized modality scores. Normalization
/// statistics may be frozen from a validation set via `stats`.
inline std::vector<double> fuse(const AlignedScores& aligned,
                                const FusionWeights& w,
                                const std::vector<MinMax>* stats = nullptr) {
  check_aligned(aligned);
  if (w.weights.size() != aligned.modalities.size())
    throw AlignmentError("weight count does not match modality count");
  double sum = 0.0;
  for (double v : w.weights) {
    if (v < 0.0) throw ConfigError("fusion weights must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("fusion weights must sum to 1");
  std::vector<std::vector<double>> norm(aligned.scores.size());
  for (std::size_t m = 0; m < aligned.scores.size(); ++m) {
    const MinMax mm =
        stats != nullptr ? (*stats)[m] : score_range(aligned.scores[m]);
    norm[m] = normalize_scores(aligned.scores[m], mm);
  }
  std::vector<double> fused(aligned.labels.size(), 0.0);
  for (std::size_t m = 0; m < norm.size(); ++m) {
    const double wm = w.weights[m];
    if (wm == 0.0) continue;
    for (std::size_t i = 0; i < fused.size(); ++i)
      fused[i] += wm * norm[m][i];
  }
  return fused;
}

struct WeightSearchResult {
  FusionWeights weights;
  double eer_percent = 0.0;
  double di = 0.0;
};

namespace detail {

inline void enumerate_simplex(int modalities, int steps,
                              std::vector<int>& partial,
                              std::vector<std::vector<int>>& out) {
  if (static_cast<int>(partial.size()) == modalities - 1) {
    int used = 0;
    for (int v : partial) used += v;
    partial.push_back(steps - used);
    out.push_back(partial);
    partial.pop_back();
    return;
  }
  int used = 0;
  for (int v : partial) used += v;
  for (int v = 0; v <= steps - used; ++v) {
    partial.push_back(v);
    enumerate_simplex(modalities, steps, partial, out);
    partial.pop_back();
  }
}

}  // namespace detail

/// Exhaustive search over the simplex grid (step `grid_step`, one-hot
/// vertices included) minimizing validation EER; ties broken by higher DI,
/// then lexicographically smaller weights. Deterministic.
inline WeightSearchResult select_weights(const AlignedScores& validation,
                                         double grid_step = 0.05) {
  check_aligned(validation);
  const int m = static_cast<int>(validation.modalities.size());
  const double steps_d = 1.0 / grid_step;
  const int steps = static_cast<int>(std::lround(steps_d));
  if (std::abs(steps_d - steps) > 1e-9 || steps < 1)
    throw ConfigError("grid_step must evenly divide 1");
  std::vector<std::vector<int>> grid;
  std::vector<int> partial;
  detail::enumerate_simplex(m, steps, partial, grid);

  std::vector<MinMax> stats(validation.scores.size());
  for (std::size_t i = 0; i < validation.scores.size(); ++i)
    stats[i] = score_range(validation.scores[i]);

  WeightSearchResult best;
  bool have_best = false;
  for (const auto& g : grid) {
    FusionWeights w;
    w.weights.reserve(g.size());
    for (int v : g) w.weights.push_back(static_cast<double>(v) / steps);
    std::vector<double> fused = fuse(validation, w, &stats);
    ScoreSet ss = to_score_set(fused, validation.labels);
    const double eer = compute_eer(compute_roc(ss)).eer_percent;
    double di = 0.0;
    try {
      di = compute_di(ss);
    } catch (const MetricError&) {
      di = 0.0;  // degenerate fused distribution; rankable but undecidable
    }
    const bool better =
        !have_best || eer < best.eer_percent ||
        (eer == best.eer_percent && di > best.di) ||
        (eer == best.eer_percent && di == best.di &&
         std::lexicographical_compare(w.weights.begin(), w.weights.end(),
                                      best.weights.weights.begin(),
                                      best.weights.weights.end()));
    if (better) {
      best.weights = w;
      best.eer_percent = eer;
      best.di = di;
      have_best = true;
    }
  }
  return best;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_FUSION_HPP
