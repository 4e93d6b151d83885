// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_TRAINER_HPP
#define FINGERMATCH_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fingermatch/loss.hpp"
#include "fingermatch/network.hpp"
#include "fingermatch/parallel.hpp"

namespace fingermatch {

/// Indices into a training image pool. Anchor and positive share a subject
/// but are different images; the negative belongs to another subject.
struct Triplet {
  int anchor = -1;
  int positive = -1;
  int negative = -1;
};

struct MarginState {
  double beta = 0.2;
  double step = 0.05;
  double beta_max = 0.5;
  int low_yield_count = 0;  // consecutive low-yield batches seen
};

/// Counts batches whose hard-triplet yield fell below `yield_threshold`;
/// after `patience` consecutive ones the margin steps up (capped).
inline MarginState update_margin(MarginState state, double yield_fraction,
                                 double yield_threshold = 0.10,
                                 int patience = 3) {
  if (yield_fraction < yield_threshold) {
    ++state.low_yield_count;
  } else {
    state.low_yield_count = 0;
  }
  if (state.low_yield_count >= patience) {
    state.beta = std::min(state.beta + state.step, state.beta_max);
    state.low_yield_count = 0;
  }
  return state;
}

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::int64_t t = 0;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
};

template <typename T>
AdamState<T> make_adam_state(const NetworkParams<T>& params) {
  AdamState<T> s;
  s.m = zeros_like(params);
  s.v = zeros_like(params);
  return s;
}

template <typename T>
void adam_step(NetworkParams<T>& params, const std::vector<Tensor<T>>& grads,
               AdamState<T>& state, const AdamHyper& hyper) {
  if (grads.size() != params.tensors.size())
    throw DimensionError("gradient tensor count mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    if (!params.tensors[k].same_shape(grads[k]))
      throw DimensionError("gradient shape mismatch for " + params.names[k]);
    T* w = params.tensors[k].ptr();
    const T* g = grads[k].ptr();
    T* m = state.m[k].ptr();
    T* v = state.v[k].ptr();
    const std::size_t n = params.tensors[k].size();
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = hyper.beta1 * static_cast<double>(m[i]) +
                        (1.0 - hyper.beta1) * gi;
      const double vi = hyper.beta2 * static_cast<double>(v[i]) +
                        (1.0 - hyper.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      w[i] = static_cast<T>(static_cast<double>(w[i]) -
                            hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps));
    }
  }
}

/// Training pool: one image tensor per entry plus its subject id.
template <typename T>
struct TrainPool {
  std::vector<Tensor<T>> images;
  std::vector<int> subjects;
};

namespace detail {

inline std::map<int, std::vector<int>> group_by_subject(
    const std::vector<int>& subjects) {
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < subjects.size(); ++i)
    groups[subjects[i]].push_back(static_cast<int>(i));
  return groups;
}

}  // namespace detail

template <typename T>
void check_pool_mineable(const TrainPool<T>& pool) {
  auto groups = detail::group_by_subject(pool.subjects);
  if (groups.size() < 2)
    throw ProtocolError("triplet mining needs at least 2 subjects, got " +
                        std::to_string(groups.size()));
  bool any_pair = false;
  for (const auto& [subject, idx] : groups)
    if (idx.size() >= 2) any_pair = true;
  if (!any_pair)
    throw ProtocolError("triplet mining needs a subject with >= 2 images");
}

/// Uniform triplet sampling: subject with >=2 images, ordered positive pair,
/// negative image of another subject.
template <typename T>
std::vector<Triplet> sample_random_triplets(const TrainPool<T>& pool, int count,
                                            std::mt19937_64& rng) {
  check_pool_mineable(pool);
  auto groups = detail::group_by_subject(pool.subjects);
  std::vector<const std::vector<int>*> pair_subjects;
  for (const auto& [subject, idx] : groups)
    if (idx.size() >= 2) pair_subjects.push_back(&idx);
  const int n = static_cast<int>(pool.images.size());
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uniform_int_distribution<int> subj_dist(
      0, static_cast<int>(pair_subjects.size()) - 1);
  std::uniform_int_distribution<int> img_dist(0, n - 1);
  for (int k = 0; k < count; ++k) {
    const std::vector<int>& idx = *pair_subjects[subj_dist(rng)];
    std::uniform_int_distribution<int> pick(0,
                                            static_cast<int>(idx.size()) - 1);
    int a = pick(rng), p = pick(rng);
    while (p == a) p = pick(rng);
    int neg = img_dist(rng);
    while (pool.subjects[static_cast<std::size_t>(neg)] ==
           pool.subjects[static_cast<std::size_t>(idx[0])])
      neg = img_dist(rng);
    out.push_back({idx[static_cast<std::size_t>(a)],
                   idx[static_cast<std::size_t>(p)], neg});
  }
  return out;
}

template <typename T>
struct MiningResult {
  std::vector<Triplet> triplets;
  double yield_fraction = 0.0;  // qualifying / pool
};

/// Pool-and-filter hard negative mining: samples `pool_size` random triplets,
/// keeps those with d_n - d_p <= beta under the current parameter snapshot,
/// and returns up to `want` of them ranked by triplet loss descending. When
/// fewer than `want` qualify, the batch is backfilled with the highest-loss
/// non-qualifying candidates so the batch size stays constant.
template <typename T>
MiningResult<T> mine_hard_triplets(const TrainPool<T>& pool,
                                   const NetworkParams<T>& params, double beta,
                                   int pool_size, int want,
                                   std::mt19937_64& rng, int threads = 1) {
  if (pool_size < want)
    throw ConfigError("candidate pool smaller than requested batch");
  std::vector<Triplet> candidates =
      sample_random_triplets(pool, pool_size, rng);

  // Embed only the images that actually appear in the candidate set.
  std::vector<int> emb_index(pool.images.size(), -1);
  std::vector<int> unique;
  for (const Triplet& t : candidates)
    for (int idx : {t.anchor, t.positive, t.negative})
      if (emb_index[static_cast<std::size_t>(idx)] < 0) {
        emb_index[static_cast<std::size_t>(idx)] =
            static_cast<int>(unique.size());
        unique.push_back(idx);
      }
  std::vector<std::vector<T>> embeddings(unique.size());
  parallel_chunks(unique.size(), threads,
                  [&](int, std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                      embeddings[i] = forward_one(
                          params,
                          pool.images[static_cast<std::size_t>(unique[i])]);
                  });
  auto emb = [&](int image_idx) -> const std::vector<T>& {
    return embeddings[static_cast<std::size_t>(
        emb_index[static_cast<std::size_t>(image_idx)])];
  };

  struct Scored {
    Triplet triplet;
    double loss;
    bool qualifies;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  int qualifying = 0;
  for (const Triplet& t : candidates) {
    const double dp =
        static_cast<double>(squared_l2(emb(t.anchor), emb(t.positive)));
    const double dn =
        static_cast<double>(squared_l2(emb(t.anchor), emb(t.negative)));
    const bool hard = dn - dp <= beta;
    qualifying += hard ? 1 : 0;
    scored.push_back({t, std::max(0.0, dp - dn + beta), hard});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) {
                     if (a.qualifies != b.qualifies) return a.qualifies;
                     return a.loss > b.loss;
                   });
  MiningResult<T> out;
  out.yield_fraction =
      static_cast<double>(qualifying) / static_cast<double>(pool_size);
  const int take = std::min<int>(want, static_cast<int>(scored.size()));
  out.triplets.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take; ++i)
    out.triplets.push_back(scored[static_cast<std::size_t>(i)].triplet);
  return out;
}

enum class MarginSchedule { kAdaptive, kFixedEpochs };

struct TrainConfig {
  int batch_triplets = 35;   // 105 images per batch
  int epochs = 500;
  int candidate_pool = 1000;
  AdamHyper adam;
  double margin_init = 0.2;
  double margin_step = 0.05;
  double margin_max = 0.5;
  MarginSchedule margin_schedule = MarginSchedule::kAdaptive;
  double yield_threshold = 0.10;
  int yield_patience = 3;
  int margin_fixed_every = 75;  // epochs, for the fixed schedule
  std::uint64_t seed = 0;
  int threads = 1;
};

struct LossTraceRow {
  std::int64_t iter = 0;
  double loss = 0.0;
  double beta = 0.0;
  double yield = 0.0;
};

using LossTrace = std::vector<LossTraceRow>;

template <typename T>
struct TrainResult {
  NetworkParams<T> params;
  LossTrace trace;
};

/// Full training loop: per iteration, mine a hard batch under a parameter
/// snapshot, take one Adam step on the mean triplet loss, update the margin
/// schedule, and append to the trace.
template <typename T>
TrainResult<T> train(
    const TrainPool<T>& pool, const NetworkConfig& net_config,
    const TrainConfig& cfg,
    const std::function<void(int epoch, const NetworkParams<T>&)>&
        epoch_callback = nullptr) {
  check_pool_mineable(pool);
  if (cfg.batch_triplets < 1) throw ConfigError("batch_triplets must be >= 1");
  if (cfg.candidate_pool < cfg.batch_triplets)
    throw ConfigError("candidate_pool must be >= batch_triplets");

  TrainResult<T> result;
  result.params = build_network<T>(net_config, cfg.seed);
  AdamState<T> opt = make_adam_state(result.params);
  MarginState margin{cfg.margin_init, cfg.margin_step, cfg.margin_max, 0};
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  const int batch_images = 3 * cfg.batch_triplets;
  const int iters_per_epoch = std::max<int>(
      1, static_cast<int>(pool.images.size()) / batch_images);
  std::int64_t iter = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.margin_schedule == MarginSchedule::kFixedEpochs && epoch > 0 &&
        epoch % cfg.margin_fixed_every == 0)
      margin.beta = std::min(margin.beta + margin.step, margin.beta_max);
    for (int it = 0; it < iters_per_epoch; ++it) {
      MiningResult<T> mined =
          mine_hard_triplets(pool, result.params, margin.beta,
                             cfg.candidate_pool, cfg.batch_triplets, rng,
                             cfg.threads);
      std::vector<Tensor<T>> a, p, n;
      a.reserve(mined.triplets.size());
      p.reserve(mined.triplets.size());
      n.reserve(mined.triplets.size());
      for (const Triplet& t : mined.triplets) {
        a.push_back(pool.images[static_cast<std::size_t>(t.anchor)]);
        p.push_back(pool.images[static_cast<std::size_t>(t.positive)]);
        n.push_back(pool.images[static_cast<std::size_t>(t.negative)]);
      }
      BatchGradients<T> bg =
          gradients(result.params, a, p, n, static_cast<T>(margin.beta),
                    cfg.threads);
      if (!std::isfinite(static_cast<double>(bg.mean_loss)))
        throw NumericalError("non-finite loss at iteration " +
                             std::to_string(iter + 1) + " (beta " +
                             std::to_string(margin.beta) + ")");
      adam_step(result.params, bg.grads, opt, cfg.adam);
      ++iter;
      result.trace.push_back({iter, static_cast<double>(bg.mean_loss),
                              margin.beta, mined.yield_fraction});
      if (cfg.margin_schedule == MarginSchedule::kAdaptive)
        margin = update_margin(margin, mined.yield_fraction,
                               cfg.yield_threshold, cfg.yield_patience);
    }
    if (epoch_callback) epoch_callback(epoch + 1, result.params);
  }
  return result;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_TRAINER_HPP
