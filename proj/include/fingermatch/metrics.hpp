// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_METRICS_HPP
#define FINGERMATCH_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "fingermatch/errors.hpp"
#include "fingermatch/io.hpp"
#include "fingermatch/loss.hpp"

namespace fingermatch {

/// Genuine/impostor distance scores for one matcher. Lower means match.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct ROCPoint {
  double threshold;
  double far;  // fraction of impostor scores <= threshold
  double frr;  // fraction of genuine scores > threshold
};

struct ROCCurve {
  std::vector<ROCPoint> points;  // thresholds strictly increasing
};

/// Squared L2 distance between unit embeddings; the match score in [0,4].
template <typename T>
double match_score(const std::vector<T>& e1, const std::vector<T>& e2) {
  return static_cast<double>(squared_l2(e1, e2));
}

/// ROC over either a uniform grid of `thresholds` points spanning the score
/// range, or (thresholds == 0) the observed scores plus midpoints, which makes
/// the interpolated EER exact.
inline ROCCurve compute_roc(const ScoreSet& scores, int thresholds = 0) {
  if (scores.genuine.empty() || scores.impostor.empty())
    throw MetricError("ROC needs nonempty genuine and impostor score lists");
  std::vector<double> gen = scores.genuine, imp = scores.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());

  std::vector<double> ts;
  if (thresholds > 0) {
    const double lo = std::min(gen.front(), imp.front());
    const double hi = std::max(gen.back(), imp.back());
    ts.reserve(static_cast<std::size_t>(thresholds) + 2);
    ts.push_back(lo - 1.0);
    for (int i = 0; i < thresholds; ++i)
      ts.push_back(lo + (hi - lo) * i / std::max(1, thresholds - 1));
    ts.push_back(hi + 1.0);
  } else {
    std::vector<double> all;
    all.reserve(gen.size() + imp.size());
    all.insert(all.end(), gen.begin(), gen.end());
    all.insert(all.end(), imp.begin(), imp.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    ts.push_back(all.front() - 1.0);
    for (std::size_t i = 0; i < all.size(); ++i) {
      ts.push_back(all[i]);
      if (i + 1 < all.size()) ts.push_back(0.5 * (all[i] + all[i + 1]));
    }
    ts.push_back(all.back() + 1.0);
  }
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  ROCCurve roc;
  roc.points.reserve(ts.size());
  for (double t : ts) {
    const auto imp_le = static_cast<double>(
        std::upper_bound(imp.begin(), imp.end(), t) - imp.begin());
    const auto gen_gt = static_cast<double>(
        gen.end() - std::upper_bound(gen.begin(), gen.end(), t));
    roc.points.push_back(
        {t, imp_le / static_cast<double>(imp.size()),
         gen_gt / static_cast<double>(gen.size())});
  }
  return roc;
}

struct EERResult {
  double eer_percent = 0.0;
  double threshold = 0.0;
  bool degenerate = false;  // no FAR/FRR crossing bracket on the curve
};

/// EER at the FAR/FRR crossing, linearly interpolated between the bracketing
/// thresholds. Returned in percent.
inline EERResult compute_eer(const ROCCurve& roc) {
  if (roc.points.empty()) throw MetricError("empty ROC curve");
  EERResult out;
  // FAR - FRR is non-decreasing in the threshold.
  for (std::size_t i = 0; i < roc.points.size(); ++i) {
    const double d = roc.points[i].far - roc.points[i].frr;
    if (d >= 0.0) {
      if (d == 0.0 || i == 0) {
        out.eer_percent = 100.0 * roc.points[i].far;
        out.threshold = roc.points[i].threshold;
        return out;
      }
      const ROCPoint& a = roc.points[i - 1];
      const ROCPoint& b = roc.points[i];
      const double d1 = a.far - a.frr;
      const double d2 = b.far - b.frr;
      const double alpha = -d1 / (d2 - d1);
      out.eer_percent = 100.0 * (a.far + alpha * (b.far - a.far));
      out.threshold = a.threshold + alpha * (b.threshold - a.threshold);
      return out;
    }
  }
  // No crossing: report the point of closest approach and flag it.
  out.degenerate = true;
  double best = std::numeric_limits<double>::infinity();
  for (const ROCPoint& p : roc.points) {
    const double gap = std::abs(p.far - p.frr);
    if (gap < best) {
      best = gap;
      out.eer_percent = 100.0 * 0.5 * (p.far + p.frr);
      out.threshold = p.threshold;
    }
  }
  return out;
}

/// Decidability index d': separation of the two score distributions using
/// population variances.
inline double compute_di(const ScoreSet& scores) {
  if (scores.genuine.size() < 2 || scores.impostor.size() < 2)
    throw MetricError("DI needs >= 2 scores on each side");
  auto moments = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    return std::pair<double, double>(mean, var);
  };
  auto [mg, vg] = moments(scores.genuine);
  auto [mi, vi] = moments(scores.impostor);
  const double pooled = 0.5 * (vg + vi);
  if (pooled <= 0.0) throw MetricError("DI undefined: zero pooled variance");
  return std::abs(mi - mg) / std::sqrt(pooled);
}

/// Rank-1 identification rate in percent; ties broken by lowest gallery index.
template <typename T>
double compute_crr(const std::vector<std::vector<T>>& gallery_embeddings,
                   const std::vector<int>& gallery_subjects,
                   const std::vector<std::vector<T>>& probe_embeddings,
                   const std::vector<int>& probe_subjects) {
  if (gallery_embeddings.empty())
    throw ProtocolError("CRR needs a nonempty gallery");
  if (probe_embeddings.empty())
    throw ProtocolError("CRR needs a nonempty probe set");
  std::size_t correct = 0;
  for (std::size_t p = 0; p < probe_embeddings.size(); ++p) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < gallery_embeddings.size(); ++g) {
      const double d = match_score(probe_embeddings[p], gallery_embeddings[g]);
      if (d < best) {
        best = d;
        best_g = g;
      }
    }
    if (gallery_subjects[best_g] == probe_subjects[p]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(probe_embeddings.size());
}

/// Exhaustive gallery x probe scoring into exact lists.
template <typename T>
ScoreSet score_all_pairs(const std::vector<std::vector<T>>& gallery_embeddings,
                         const std::vector<int>& gallery_subjects,
                         const std::vector<std::vector<T>>& probe_embeddings,
                         const std::vector<int>& probe_subjects) {
  if (gallery_embeddings.empty() || probe_embeddings.empty())
    throw ProtocolError("pair scoring needs nonempty gallery and probe sets");
  ScoreSet out;
  for (std::size_t p = 0; p < probe_embeddings.size(); ++p)
    for (std::size_t g = 0; g < gallery_embeddings.size(); ++g) {
      const double d = match_score(probe_embeddings[p], gallery_embeddings[g]);
      if (probe_subjects[p] == gallery_subjects[g])
        out.genuine.push_back(d);
      else
        out.impostor.push_back(d);
    }
  return out;
}

// --- streaming histogram path for very large impostor volumes ----------------

/// Counting histogram over a fixed score range with exact streaming moments;
/// EER from the binned curve must stay within 0.05 percentage points of the
/// exact-list EER at desk scale (enforced by tests).
struct ScoreHistogram {
  double lo = 0.0, hi = 4.0;
  std::vector<std::uint64_t> genuine_bins, impostor_bins;
  std::uint64_t genuine_count = 0, impostor_count = 0;
  double gen_sum = 0, gen_sum2 = 0, imp_sum = 0, imp_sum2 = 0;

  explicit ScoreHistogram(int bins = 4096, double lo_ = 0.0, double hi_ = 4.0)
      : lo(lo_), hi(hi_), genuine_bins(static_cast<std::size_t>(bins), 0),
        impostor_bins(static_cast<std::size_t>(bins), 0) {}

  void add(double score, bool genuine) {
    const int nbins = static_cast<int>(genuine_bins.size());
    int b = static_cast<int>((score - lo) / (hi - lo) * nbins);
    b = std::clamp(b, 0, nbins - 1);
    if (genuine) {
      ++genuine_bins[static_cast<std::size_t>(b)];
      ++genuine_count;
      gen_sum += score;
      gen_sum2 += score * score;
    } else {
      ++impostor_bins[static_cast<std::size_t>(b)];
      ++impostor_count;
      imp_sum += score;
      imp_sum2 += score * score;
    }
  }
};

inline ROCCurve compute_roc(const ScoreHistogram& h) {
  if (h.genuine_count == 0 || h.impostor_count == 0)
    throw MetricError("ROC needs nonempty genuine and impostor scores");
  ROCCurve roc;
  const int nbins = static_cast<int>(h.genuine_bins.size());
  const double bw = (h.hi - h.lo) / nbins;
  std::uint64_t gen_le = 0, imp_le = 0;
  roc.points.push_back({h.lo - 1.0, 0.0, 1.0});
  for (int b = 0; b < nbins; ++b) {
    gen_le += h.genuine_bins[static_cast<std::size_t>(b)];
    imp_le += h.impostor_bins[static_cast<std::size_t>(b)];
    roc.points.push_back(
        {h.lo + bw * (b + 1),
         static_cast<double>(imp_le) / static_cast<double>(h.impostor_count),
         1.0 - static_cast<double>(gen_le) /
                   static_cast<double>(h.genuine_count)});
  }
  return roc;
}

inline double compute_di(const ScoreHistogram& h) {
  if (h.genuine_count < 2 || h.impostor_count < 2)
    throw MetricError("DI needs >= 2 scores on each side");
  const double ng = static_cast<double>(h.genuine_count);
  const double ni = static_cast<double>(h.impostor_count);
  const double mg = h.gen_sum / ng, mi = h.imp_sum / ni;
  const double vg = h.gen_sum2 / ng - mg * mg;
  const double vi = h.imp_sum2 / ni - mi * mi;
  const double pooled = 0.5 * (vg + vi);
  if (pooled <= 0.0) throw MetricError("DI undefined: zero pooled variance");
  return std::abs(mi - mg) / std::sqrt(pooled);
}

/// Streaming variant of score_all_pairs for pair volumes that must not be
/// materialized.
template <typename T>
ScoreHistogram score_all_pairs_streaming(
    const std::vector<std::vector<T>>& gallery_embeddings,
    const std::vector<int>& gallery_subjects,
    const std::vector<std::vector<T>>& probe_embeddings,
    const std::vector<int>& probe_subjects, int bins = 4096) {
  if (gallery_embeddings.empty() || probe_embeddings.empty())
    throw ProtocolError("pair scoring needs nonempty gallery and probe sets");
  ScoreHistogram h(bins);
  for (std::size_t p = 0; p < probe_embeddings.size(); ++p)
    for (std::size_t g = 0; g < gallery_embeddings.size(); ++g)
      h.add(match_score(probe_embeddings[p], gallery_embeddings[g]),
            probe_subjects[p] == gallery_subjects[g]);
  return h;
}

// --- report emission ----------------------------------------------------------

struct EvalReport {
  double eer_percent = 0.0;
  double crr_percent = 0.0;
  double di = 0.0;
  std::uint64_t genuine_count = 0;
  std::uint64_t impostor_count = 0;
  std::uint64_t parameter_count = 0;
  std::string protocol;
};

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["protocol"] = r.protocol;
  j["eer_percent"] = r.eer_percent;
  if (r.crr_percent >= 0.0) j["crr_percent"] = r.crr_percent;  // unknown when
                                                               // scored from a
                                                               // CSV alone
  j["di"] = r.di;
  j["genuine_count"] = r.genuine_count;
  j["impostor_count"] = r.impostor_count;
  j["parameter_count"] = r.parameter_count;
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.protocol = j.at("protocol").get<std::string>();
  r.eer_percent = j.at("eer_percent").get<double>();
  r.crr_percent =
      j.contains("crr_percent") ? j.at("crr_percent").get<double>() : -1.0;
  r.di = j.at("di").get<double>();
  r.genuine_count = j.at("genuine_count").get<std::uint64_t>();
  r.impostor_count = j.at("impostor_count").get<std::uint64_t>();
  r.parameter_count = j.at("parameter_count").get<std::uint64_t>();
  return r;
}

/// JSON report plus ROC CSV (`threshold,far,frr`); byte-stable for fixed
/// inputs.
inline void emit_report(const EvalReport& report, const ROCCurve& roc,
                        const std::string& report_path,
                        const std::string& roc_path) {
  {
    std::ofstream os(report_path);
    if (!os) throw IoError("cannot write report: " + report_path);
    os << report_to_json(report).dump(2) << "\n";
    if (!os) throw IoError("write failed: " + report_path);
  }
  std::ofstream os(roc_path);
  if (!os) throw IoError("cannot write ROC: " + roc_path);
  os << "threshold,far,frr\n";
  for (const ROCPoint& p : roc.points)
    os << format_double(p.threshold) << "," << format_double(p.far) << ","
       << format_double(p.frr) << "\n";
  if (!os) throw IoError("write failed: " + roc_path);
}

}  // namespace fingermatch

#endif  // FINGERMATCH_METRICS_HPP
