// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_NETWORK_HPP
#define FINGERMATCH_NETWORK_HPP

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fingermatch/errors.hpp"
#include "fingermatch/loss.hpp"
#include "fingermatch/ops.hpp"
#include "fingermatch/parallel.hpp"
#include "fingermatch/tensor.hpp"

namespace fingermatch {

struct KernelShape {
  int rows = 0;
  int cols = 0;
};

struct PoolShape {
  int rows = 1;
  int cols = 1;
};

// One dual-orientation stage: a fat (horizontal) and a tall (vertical)
// convolution branch applied to the same input, concatenated along channels,
// then max-pooled.
struct DualBlockConfig {
  KernelShape h_kernel;      // cols > rows
  KernelShape v_kernel;      // rows > cols
  int channels_per_branch = 0;
  PoolShape pool;
};

struct NetworkConfig {
  int input_height = 240;
  int input_width = 80;
  std::vector<DualBlockConfig> blocks = {
      {{5, 9}, {9, 5}, 32, {2, 2}},
      {{3, 7}, {7, 3}, 64, {1, 2}},
      {{3, 5}, {5, 3}, 96, {2, 2}},
  };
  std::vector<int> tail_conv_channels = {128, 128};
  PoolShape tail_pool = {2, 2};
  int embedding_dim = 128;
};

struct StageShape {
  int channels, height, width;
};

// Propagates feature-map shapes through the whole network, throwing a
// ConfigError naming the offending field on any invariant violation.
inline std::vector<StageShape> validate_config(const NetworkConfig& cfg) {
  if (cfg.input_height <= cfg.input_width)
    throw ConfigError("input_height must exceed input_width (got " +
                      std::to_string(cfg.input_height) + "x" +
                      std::to_string(cfg.input_width) + ")");
  if (cfg.blocks.size() != 3)
    throw ConfigError("blocks: exactly 3 dual-orientation blocks required, got " +
                      std::to_string(cfg.blocks.size()));
  if (cfg.embedding_dim < 2)
    throw ConfigError("embedding_dim must be >= 2");
  std::vector<StageShape> shapes;
  StageShape s{1, cfg.input_height, cfg.input_width};
  shapes.push_back(s);
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    const auto& blk = cfg.blocks[b];
    const std::string tag = "blocks[" + std::to_string(b) + "]";
    if (blk.h_kernel.cols <= blk.h_kernel.rows)
      throw ConfigError(tag + ".h_kernel must be wider than tall");
    if (blk.v_kernel.rows <= blk.v_kernel.cols)
      throw ConfigError(tag + ".v_kernel must be taller than wide");
    if (blk.channels_per_branch < 1)
      throw ConfigError(tag + ".channels_per_branch must be >= 1");
    if (b == 1 && (blk.pool.rows != 1 || blk.pool.cols < 2))
      throw ConfigError(tag + ".pool: block 2 must pool width only, (1,k) k>=2");
    if (blk.pool.rows < 1 || blk.pool.cols < 1)
      throw ConfigError(tag + ".pool must be >= 1 in both directions");
    if (blk.h_kernel.rows > s.height || blk.h_kernel.cols > s.width)
      throw ConfigError(tag + ".h_kernel does not fit " +
                        std::to_string(s.height) + "x" + std::to_string(s.width));
    if (blk.v_kernel.rows > s.height || blk.v_kernel.cols > s.width)
      throw ConfigError(tag + ".v_kernel does not fit " +
                        std::to_string(s.height) + "x" + std::to_string(s.width));
    if (blk.pool.rows > s.height || blk.pool.cols > s.width)
      throw ConfigError(tag + ".pool does not fit " + std::to_string(s.height) +
                        "x" + std::to_string(s.width));
    s.channels = 2 * blk.channels_per_branch;
    s.height /= blk.pool.rows;
    s.width /= blk.pool.cols;
    shapes.push_back(s);
  }
  for (std::size_t t = 0; t < cfg.tail_conv_channels.size(); ++t) {
    const std::string tag = "tail_conv_channels[" + std::to_string(t) + "]";
    if (cfg.tail_conv_channels[t] < 1)
      throw ConfigError(tag + " must be >= 1");
    if (s.height < 3 || s.width < 3)
      throw ConfigError(tag + ": 3x3 kernel does not fit " +
                        std::to_string(s.height) + "x" + std::to_string(s.width));
    s.channels = cfg.tail_conv_channels[t];
    shapes.push_back(s);
  }
  if (cfg.tail_pool.rows < 1 || cfg.tail_pool.cols < 1)
    throw ConfigError("tail_pool must be >= 1 in both directions");
  if (cfg.tail_pool.rows > s.height || cfg.tail_pool.cols > s.width)
    throw ConfigError("tail_pool does not fit " + std::to_string(s.height) +
                      "x" + std::to_string(s.width));
  s.height /= cfg.tail_pool.rows;
  s.width /= cfg.tail_pool.cols;
  shapes.push_back(s);
  if (s.height * s.width * s.channels < 1)
    throw ConfigError("flattened feature vector is empty");
  return shapes;
}

template <typename T>
struct NetworkParams {
  NetworkConfig config;
  std::vector<std::string> names;
  std::vector<Tensor<T>> tensors;

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    throw ConfigError("unknown parameter tensor: " + name);
  }
  Tensor<T>& tensor(const std::string& name) {
    return tensors[static_cast<std::size_t>(index_of(name))];
  }
  const Tensor<T>& tensor(const std::string& name) const {
    return tensors[static_cast<std::size_t>(index_of(name))];
  }

  template <typename U>
  NetworkParams<U> cast() const {
    NetworkParams<U> out;
    out.config = config;
    out.names = names;
    out.tensors.reserve(tensors.size());
    for (const auto& t : tensors) out.tensors.push_back(t.template cast<U>());
    return out;
  }
};

template <typename T>
std::size_t count_parameters(const NetworkParams<T>& params) {
  std::size_t n = 0;
  for (const auto& t : params.tensors) n += t.size();
  return n;
}

// Gradient (or optimizer-moment) storage mirroring a parameter set.
template <typename T>
std::vector<Tensor<T>> zeros_like(const NetworkParams<T>& params) {
  std::vector<Tensor<T>> out;
  out.reserve(params.tensors.size());
  for (const auto& t : params.tensors) out.emplace_back(t.shape);
  return out;
}

namespace detail {

template <typename T>
void init_uniform_fan_in(Tensor<T>& w, int fan_in, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-a, a);
  for (T& v : w.data) v = static_cast<T>(dist(rng));
}

}  // namespace detail

template <typename T>
struct ForwardCache;

template <typename T>
std::vector<T> forward_one(const NetworkParams<T>& params, const Tensor<T>& image,
                           ForwardCache<T>* cache = nullptr);

template <typename T, typename AddFn>
void build_network_draw(const NetworkConfig& config,
                        const std::vector<StageShape>& shapes,
                        std::mt19937_64& rng, NetworkParams<T>& params,
                        AddFn&& add);

/// Builds a parameter set for `config`, deterministically for a fixed seed.
/// Convolutions get fan-in-scaled uniform weights and zero biases. The final
/// dense layer additionally has its rows projected orthogonal to the mean
/// pre-dense feature of seeded noise probes, so that a freshly built network
/// spreads distinct inputs over the embedding hypersphere instead of
/// collapsing them along the shared mean activation direction.
template <typename T>
NetworkParams<T> build_network(const NetworkConfig& config, std::uint64_t seed) {
  auto shapes = validate_config(config);
  NetworkParams<T> params;
  params.config = config;
  std::mt19937_64 rng(seed);

  auto add = [&params](const std::string& name, Tensor<T> t) {
    params.names.push_back(name);
    params.tensors.push_back(std::move(t));
  };

  // Tiny networks can come out of a random draw completely dead (every ReLU
  // channel zero for some input), which makes the embedding undefined. Draws
  // are validated on noise probes and retried from the continuing RNG stream,
  // so the first healthy draw is identical to the unchecked behavior.
  const int kMaxAttempts = 16;
  for (int attempt = 0;; ++attempt) {
    params.names.clear();
    params.tensors.clear();
    try {
      build_network_draw(config, shapes, rng, params, add);
      break;
    } catch (const DegenerateInputError&) {
      if (attempt + 1 == kMaxAttempts)
        throw NumericalError(
            "network initialization stayed degenerate after " +
            std::to_string(kMaxAttempts) + " draws; seed " +
            std::to_string(seed));
    }
  }
  return params;
}

template <typename T, typename AddFn>
void build_network_draw(const NetworkConfig& config,
                        const std::vector<StageShape>& shapes,
                        std::mt19937_64& rng, NetworkParams<T>& params,
                        AddFn&& add) {
  int in_c = 1;
  for (std::size_t b = 0; b < config.blocks.size(); ++b) {
    const auto& blk = config.blocks[b];
    const std::string base = "block" + std::to_string(b);
    Tensor<T> wh({blk.channels_per_branch, in_c, blk.h_kernel.rows,
                  blk.h_kernel.cols});
    detail::init_uniform_fan_in(wh, in_c * blk.h_kernel.rows * blk.h_kernel.cols,
                                rng);
    add(base + ".h.weight", std::move(wh));
    add(base + ".h.bias", Tensor<T>({blk.channels_per_branch}));
    Tensor<T> wv({blk.channels_per_branch, in_c, blk.v_kernel.rows,
                  blk.v_kernel.cols});
    detail::init_uniform_fan_in(wv, in_c * blk.v_kernel.rows * blk.v_kernel.cols,
                                rng);
    add(base + ".v.weight", std::move(wv));
    add(base + ".v.bias", Tensor<T>({blk.channels_per_branch}));
    in_c = 2 * blk.channels_per_branch;
  }
  for (std::size_t t = 0; t < config.tail_conv_channels.size(); ++t) {
    const std::string base = "tail" + std::to_string(t);
    const int out_c = config.tail_conv_channels[t];
    Tensor<T> w({out_c, in_c, 3, 3});
    detail::init_uniform_fan_in(w, in_c * 9, rng);
    add(base + ".weight", std::move(w));
    add(base + ".bias", Tensor<T>({out_c}));
    in_c = out_c;
  }
  const StageShape& last = shapes.back();
  const int flat = last.channels * last.height * last.width;
  Tensor<T> wd({config.embedding_dim, flat});
  detail::init_uniform_fan_in(wd, flat, rng);
  add("dense.weight", std::move(wd));
  add("dense.bias", Tensor<T>({config.embedding_dim}));

  // Mean-feature decorrelation: estimate the mean pre-dense feature over
  // seeded noise probes and remove that direction from every dense row.
  const int kProbes = 32;
  std::vector<double> mean(static_cast<std::size_t>(flat), 0.0);
  {
    std::uniform_real_distribution<double> pix(0.0, 1.0);
    for (int k = 0; k < kProbes; ++k) {
      Tensor<T> img({1, config.input_height, config.input_width});
      for (T& v : img.data) v = static_cast<T>(pix(rng));
      ForwardCache<T> cache;
      forward_one(params, img, &cache);
      for (int i = 0; i < flat; ++i)
        mean[static_cast<std::size_t>(i)] +=
            static_cast<double>(cache.flat[static_cast<std::size_t>(i)]);
    }
    double norm2 = 0.0;
    for (double& m : mean) {
      m /= kProbes;
      norm2 += m * m;
    }
    if (norm2 > 1e-12) {
      Tensor<T>& w = params.tensor("dense.weight");
      for (int r = 0; r < config.embedding_dim; ++r) {
        T* row = w.ptr() + static_cast<std::size_t>(r) * flat;
        double dot = 0.0;
        for (int i = 0; i < flat; ++i)
          dot += static_cast<double>(row[i]) * mean[static_cast<std::size_t>(i)];
        const double c = dot / norm2;
        for (int i = 0; i < flat; ++i)
          row[i] -= static_cast<T>(c * mean[static_cast<std::size_t>(i)]);
      }
    }
    // Post-projection sanity: fresh probes must still embed. Throws the
    // DegenerateInputError that triggers a retry in build_network.
    for (int k = 0; k < kProbes; ++k) {
      Tensor<T> img({1, config.input_height, config.input_width});
      for (T& v : img.data) v = static_cast<T>(pix(rng));
      forward_one(params, img);
    }
  }
}

/// One dual-orientation block: H-branch and V-branch convs (same padding,
/// ReLU), channel concat (H first), then max-pool.
template <typename T>
Tensor<T> dual_block_forward(const Tensor<T>& input, const DualBlockConfig& block,
                             const Tensor<T>& wh, const Tensor<T>& bh,
                             const Tensor<T>& wv, const Tensor<T>& bv,
                             Tensor<T>* branch_h = nullptr,
                             Tensor<T>* branch_v = nullptr,
                             Tensor<T>* concat_out = nullptr,
                             std::vector<int>* pool_arg = nullptr) {
  Tensor<T> h = conv2d_same(input, wh, bh);
  relu_inplace(h);
  Tensor<T> v = conv2d_same(input, wv, bv);
  relu_inplace(v);
  const int c = h.dim(0), hh = h.dim(1), ww = h.dim(2);
  Tensor<T> cat({2 * c, hh, ww});
  std::copy(h.data.begin(), h.data.end(), cat.data.begin());
  std::copy(v.data.begin(), v.data.end(), cat.data.begin() + h.size());
  Tensor<T> out = maxpool(cat, block.pool.rows, block.pool.cols, pool_arg);
  if (branch_h) *branch_h = std::move(h);
  if (branch_v) *branch_v = std::move(v);
  if (concat_out) *concat_out = std::move(cat);
  return out;
}

template <typename T>
struct ForwardCache {
  std::vector<Tensor<T>> block_inputs;   // input map of each dual block
  std::vector<Tensor<T>> branch_h;       // post-ReLU H branch
  std::vector<Tensor<T>> branch_v;       // post-ReLU V branch
  std::vector<std::vector<int>> block_concat_shape;
  std::vector<std::vector<int>> block_pool_arg;
  std::vector<Tensor<T>> tail_inputs;    // input map of each tail conv
  std::vector<Tensor<T>> tail_outputs;   // post-ReLU tail conv outputs
  std::vector<int> tail_pool_arg;
  std::vector<int> tail_pool_in_shape;
  std::vector<T> flat;                   // pre-dense feature vector
  std::vector<T> embedding;              // unit-norm output
  T pre_norm = T(0);                     // ||dense output||
};

template <typename T>
std::vector<T> forward_one(const NetworkParams<T>& params, const Tensor<T>& image,
                           ForwardCache<T>* cache) {
  const NetworkConfig& cfg = params.config;
  if (image.dim(0) != 1 || image.dim(1) != cfg.input_height ||
      image.dim(2) != cfg.input_width)
    throw DimensionError("input image " + image.shape_str() + " != configured " +
                         std::to_string(cfg.input_height) + "x" +
                         std::to_string(cfg.input_width));
  Tensor<T> x = image;
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    const std::string base = "block" + std::to_string(b);
    Tensor<T> bh, bv, cat;
    std::vector<int> arg;
    Tensor<T> next = dual_block_forward(
        x, cfg.blocks[b], params.tensor(base + ".h.weight"),
        params.tensor(base + ".h.bias"), params.tensor(base + ".v.weight"),
        params.tensor(base + ".v.bias"), cache ? &bh : nullptr,
        cache ? &bv : nullptr, cache ? &cat : nullptr, cache ? &arg : nullptr);
    if (cache) {
      cache->block_inputs.push_back(std::move(x));
      cache->branch_h.push_back(std::move(bh));
      cache->branch_v.push_back(std::move(bv));
      cache->block_concat_shape.push_back(cat.shape);
      cache->block_pool_arg.push_back(std::move(arg));
    }
    x = std::move(next);
  }
  for (std::size_t t = 0; t < cfg.tail_conv_channels.size(); ++t) {
    const std::string base = "tail" + std::to_string(t);
    Tensor<T> y = conv2d_same(x, params.tensor(base + ".weight"),
                              params.tensor(base + ".bias"));
    relu_inplace(y);
    if (cache) {
      cache->tail_inputs.push_back(std::move(x));
      cache->tail_outputs.push_back(y);
    }
    x = std::move(y);
  }
  std::vector<int> pool_arg;
  std::vector<int> pool_in_shape = x.shape;
  Tensor<T> pooled =
      maxpool(x, cfg.tail_pool.rows, cfg.tail_pool.cols, &pool_arg);
  std::vector<T> flat(pooled.data.begin(), pooled.data.end());
  std::vector<T> z =
      dense(flat, params.tensor("dense.weight"), params.tensor("dense.bias"));
  T norm = l2_norm(z);
  std::vector<T> e = l2_normalize(z);
  if (cache) {
    cache->tail_pool_arg = std::move(pool_arg);
    cache->tail_pool_in_shape = std::move(pool_in_shape);
    cache->flat = std::move(flat);
    cache->embedding = e;
    cache->pre_norm = norm;
  }
  return e;
}

/// Batch forward. Deterministic for a fixed thread count.
template <typename T>
std::vector<std::vector<T>> forward(const NetworkParams<T>& params,
                                    const std::vector<Tensor<T>>& images,
                                    int threads = 1) {
  std::vector<std::vector<T>> out(images.size());
  parallel_chunks(images.size(), threads,
                  [&](int, std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                      out[i] = forward_one(params, images[i]);
                  });
  return out;
}

/// Backward pass for one image given dL/d(embedding); accumulates into grads.
template <typename T>
void backward_one(const NetworkParams<T>& params, const ForwardCache<T>& cache,
                  const std::vector<T>& dembedding,
                  std::vector<Tensor<T>>& grads) {
  const NetworkConfig& cfg = params.config;
  std::vector<T> dz =
      l2_normalize_backward(cache.embedding, cache.pre_norm, dembedding);
  const int iw = params.index_of("dense.weight");
  const int ib = params.index_of("dense.bias");
  std::vector<T> dflat =
      dense_backward(cache.flat, params.tensor("dense.weight"), dz,
                     grads[static_cast<std::size_t>(iw)],
                     grads[static_cast<std::size_t>(ib)]);
  // unpool the flattened tail feature
  Tensor<T> dpool(std::vector<int>{
      cache.tail_pool_in_shape[0] / 1,
      cache.tail_pool_in_shape[1] / cfg.tail_pool.rows,
      cache.tail_pool_in_shape[2] / cfg.tail_pool.cols});
  std::copy(dflat.begin(), dflat.end(), dpool.data.begin());
  Tensor<T> dx =
      maxpool_backward(dpool, cache.tail_pool_arg, cache.tail_pool_in_shape);
  for (int t = static_cast<int>(cfg.tail_conv_channels.size()) - 1; t >= 0;
       --t) {
    const std::string base = "tail" + std::to_string(t);
    relu_backward_inplace(cache.tail_outputs[static_cast<std::size_t>(t)], dx);
    const int w_idx = params.index_of(base + ".weight");
    const int b_idx = params.index_of(base + ".bias");
    Tensor<T> dinput(cache.tail_inputs[static_cast<std::size_t>(t)].shape);
    conv2d_same_backward(cache.tail_inputs[static_cast<std::size_t>(t)],
                         params.tensor(base + ".weight"), dx, &dinput,
                         grads[static_cast<std::size_t>(w_idx)],
                         grads[static_cast<std::size_t>(b_idx)]);
    dx = std::move(dinput);
  }
  for (int b = static_cast<int>(cfg.blocks.size()) - 1; b >= 0; --b) {
    const std::string base = "block" + std::to_string(b);
    const std::size_t bi = static_cast<std::size_t>(b);
    Tensor<T> dcat = maxpool_backward(dx, cache.block_pool_arg[bi],
                                      cache.block_concat_shape[bi]);
    const std::size_t half = cache.branch_h[bi].size();
    Tensor<T> dh(cache.branch_h[bi].shape), dv(cache.branch_v[bi].shape);
    std::copy(dcat.data.begin(), dcat.data.begin() + half, dh.data.begin());
    std::copy(dcat.data.begin() + half, dcat.data.end(), dv.data.begin());
    relu_backward_inplace(cache.branch_h[bi], dh);
    relu_backward_inplace(cache.branch_v[bi], dv);
    const bool need_dx = b > 0;
    Tensor<T> dinput(cache.block_inputs[bi].shape);
    Tensor<T> dinput_v(cache.block_inputs[bi].shape);
    conv2d_same_backward(
        cache.block_inputs[bi], params.tensor(base + ".h.weight"), dh,
        need_dx ? &dinput : nullptr,
        grads[static_cast<std::size_t>(params.index_of(base + ".h.weight"))],
        grads[static_cast<std::size_t>(params.index_of(base + ".h.bias"))]);
    conv2d_same_backward(
        cache.block_inputs[bi], params.tensor(base + ".v.weight"), dv,
        need_dx ? &dinput_v : nullptr,
        grads[static_cast<std::size_t>(params.index_of(base + ".v.weight"))],
        grads[static_cast<std::size_t>(params.index_of(base + ".v.bias"))]);
    if (need_dx) {
      for (std::size_t i = 0; i < dinput.data.size(); ++i)
        dinput.data[i] += dinput_v.data[i];
      dx = std::move(dinput);
    }
  }
}

template <typename T>
struct BatchGradients {
  std::vector<Tensor<T>> grads;  // aligned with params.tensors
  T mean_loss = T(0);
};

/// Mean triplet-loss gradient over a batch of (anchor, positive, negative)
/// image triples. Bitwise deterministic for a fixed thread count.
template <typename T>
BatchGradients<T> gradients(const NetworkParams<T>& params,
                            const std::vector<Tensor<T>>& anchors,
                            const std::vector<Tensor<T>>& positives,
                            const std::vector<Tensor<T>>& negatives, T beta,
                            int threads = 1) {
  const std::size_t n = anchors.size();
  if (positives.size() != n || negatives.size() != n)
    throw DimensionError("triplet batch lists have mismatched lengths");
  if (n == 0) throw ProtocolError("empty triplet batch");
  if (!(beta > T(0))) throw ConfigError("margin must be positive");

  const int nchunks =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(
                                                 threads < 1 ? 1 : threads),
                                             n));
  std::vector<std::vector<Tensor<T>>> chunk_grads(
      static_cast<std::size_t>(nchunks));
  std::vector<T> chunk_loss(static_cast<std::size_t>(nchunks), T(0));
  for (auto& g : chunk_grads) g = zeros_like(params);

  parallel_chunks(n, nchunks, [&](int c, std::size_t lo, std::size_t hi) {
    auto& g = chunk_grads[static_cast<std::size_t>(c)];
    const T inv_n = T(1) / static_cast<T>(n);
    for (std::size_t i = lo; i < hi; ++i) {
      ForwardCache<T> ca, cp, cn;
      std::vector<T> ea = forward_one(params, anchors[i], &ca);
      std::vector<T> ep = forward_one(params, positives[i], &cp);
      std::vector<T> en = forward_one(params, negatives[i], &cn);
      T dp = squared_l2(ea, ep);
      T dn = squared_l2(ea, en);
      T arg = dp - dn + beta;
      if (!std::isfinite(static_cast<double>(arg)))
        throw NumericalError("non-finite triplet loss at batch slot " +
                             std::to_string(i));
      if (arg <= T(0)) continue;  // flat region of the hinge
      chunk_loss[static_cast<std::size_t>(c)] += arg * inv_n;
      const std::size_t d = ea.size();
      std::vector<T> da(d), dpv(d), dnv(d);
      for (std::size_t k = 0; k < d; ++k) {
        da[k] = T(2) * (en[k] - ep[k]) * inv_n;
        dpv[k] = T(2) * (ep[k] - ea[k]) * inv_n;
        dnv[k] = T(2) * (ea[k] - en[k]) * inv_n;
      }
      backward_one(params, ca, da, g);
      backward_one(params, cp, dpv, g);
      backward_one(params, cn, dnv, g);
    }
  });

  BatchGradients<T> out;
  out.grads = std::move(chunk_grads[0]);
  out.mean_loss = chunk_loss[0];
  for (int c = 1; c < nchunks; ++c) {
    const auto& g = chunk_grads[static_cast<std::size_t>(c)];
    for (std::size_t t = 0; t < out.grads.size(); ++t)
      for (std::size_t i = 0; i < out.grads[t].data.size(); ++i)
        out.grads[t].data[i] += g[t].data[i];
    out.mean_loss += chunk_loss[static_cast<std::size_t>(c)];
  }
  for (std::size_t t = 0; t < out.grads.size(); ++t)
    if (!all_finite(out.grads[t]))
      throw NumericalError("non-finite gradient in tensor " + params.names[t]);
  return out;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_NETWORK_HPP
