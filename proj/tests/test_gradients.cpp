// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fingermatch/network.hpp"
#include "helpers.hpp"

using namespace fingermatch;

namespace {

struct Batch {
  std::vector<Tensor<double>> a, p, n;
};

Batch random_batch(const NetworkConfig& cfg, int triplets,
                   std::mt19937_64& rng) {
  Batch b;
  for (int i = 0; i < triplets; ++i) {
    b.a.push_back(fmtest::random_image<double>(cfg.input_height,
                                               cfg.input_width, rng));
    b.p.push_back(fmtest::random_image<double>(cfg.input_height,
                                               cfg.input_width, rng));
    b.n.push_back(fmtest::random_image<double>(cfg.input_height,
                                               cfg.input_width, rng));
  }
  return b;
}

double batch_loss(const NetworkParams<double>& params, const Batch& b,
                  double beta) {
  return gradients(params, b.a, b.p, b.n, beta).mean_loss;
}

// Randomized but always-valid tiny architecture.
NetworkConfig random_tiny_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ch(1, 3), emb(4, 8), k(0, 1), p(0, 1);
  NetworkConfig cfg;
  cfg.input_height = 16;
  cfg.input_width = 12;
  cfg.blocks.clear();
  int width = cfg.input_width;
  for (int b = 0; b < 3; ++b) {
    DualBlockConfig blk;
    // Keep every kernel within the current spatial extent.
    KernelShape h = (k(rng) && width >= 5) ? KernelShape{1, 5}
                                           : KernelShape{1, 3};
    blk.h_kernel = h;
    blk.v_kernel = {h.cols, h.rows};
    blk.channels_per_branch = ch(rng);
    if (b == 0)
      blk.pool = p(rng) ? PoolShape{2, 2} : PoolShape{2, 1};
    else if (b == 1)
      blk.pool = {1, 2};  // the middle block always pools width only
    else
      blk.pool = {1, 1};
    width /= blk.pool.cols;
    cfg.blocks.push_back(blk);
  }
  cfg.tail_conv_channels = {};
  cfg.tail_pool = p(rng) ? PoolShape{2, 2} : PoolShape{1, 1};
  cfg.embedding_dim = emb(rng);
  return cfg;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
  std::mt19937_64 rng(101);
  const double step = 1e-5;
  int checked_configs = 0;
  for (int trial = 0; trial < 24; ++trial) {
    NetworkConfig cfg = random_tiny_config(rng);
    auto params = build_network<double>(cfg, 1000 + trial);
    // Check at a generic point: the freshly built net has exact zeros at
    // ReLU kinks (zero biases, zero-padded convs), where one-sided
    // subgradients make finite differences disagree by construction.
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (auto& t : params.tensors)
      for (auto& v : t.data) v += jitter(rng);
    Batch batch = random_batch(cfg, 2, rng);
    const double beta = 0.8 + 0.4 * (trial % 3);

    BatchGradients<double> bg =
        gradients(params, batch.a, batch.p, batch.n, beta);
    if (bg.mean_loss <= 1e-3) continue;  // hinge inactive; nothing to check

    double max_rel = 0.0;
    for (std::size_t t = 0; t < params.tensors.size(); ++t) {
      Tensor<double>& w = params.tensors[t];
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        const double keep = w.data[i];
        w.data[i] = keep + step;
        const double lp = batch_loss(params, batch, beta);
        w.data[i] = keep - step;
        const double lm = batch_loss(params, batch, beta);
        w.data[i] = keep;
        const double fd = (lp - lm) / (2.0 * step);
        const double an = bg.grads[t].data[i];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
        max_rel = std::max(max_rel, std::abs(fd - an) / denom);
      }
    }
    INFO("trial " << trial << " max relative error " << max_rel);
    CHECK(max_rel < 1e-4);
    ++checked_configs;
  }
  CHECK(checked_configs >= 20);
}

TEST_CASE("batches entirely in the flat hinge region have zero gradients") {
  std::mt19937_64 rng(7);
  NetworkConfig cfg = fmtest::tiny_config();
  auto params = build_network<double>(cfg, 4);
  Tensor<double> img =
      fmtest::random_image<double>(cfg.input_height, cfg.input_width, rng);
  Tensor<double> other =
      fmtest::random_image<double>(cfg.input_height, cfg.input_width, rng);
  // anchor == positive gives d_p = 0; a tiny margin keeps every loss clamped.
  std::vector<Tensor<double>> a = {img, img}, p = {img, img},
                              n = {other, other};
  auto bg = gradients(params, a, p, n, 1e-4);
  CHECK(bg.mean_loss == 0.0);
  for (const auto& g : bg.grads)
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("repeating every triplet leaves the mean gradient unchanged") {
  std::mt19937_64 rng(55);
  NetworkConfig cfg = fmtest::tiny_config();
  auto params = build_network<double>(cfg, 9);
  Batch batch = random_batch(cfg, 3, rng);
  auto g1 = gradients(params, batch.a, batch.p, batch.n, 1.0);
  Batch twice;
  for (int rep = 0; rep < 2; ++rep) {
    twice.a.insert(twice.a.end(), batch.a.begin(), batch.a.end());
    twice.p.insert(twice.p.end(), batch.p.begin(), batch.p.end());
    twice.n.insert(twice.n.end(), batch.n.begin(), batch.n.end());
  }
  auto g2 = gradients(params, twice.a, twice.p, twice.n, 1.0);
  CHECK(g1.mean_loss == doctest::Approx(g2.mean_loss).epsilon(1e-12));
  for (std::size_t t = 0; t < g1.grads.size(); ++t)
    for (std::size_t i = 0; i < g1.grads[t].data.size(); ++i)
      CHECK(g1.grads[t].data[i] ==
            doctest::Approx(g2.grads[t].data[i]).epsilon(1e-10));
}

TEST_CASE("thread count does not change gradients bitwise in double") {
  std::mt19937_64 rng(77);
  NetworkConfig cfg = fmtest::tiny_config();
  auto params = build_network<double>(cfg, 13);
  Batch batch = random_batch(cfg, 5, rng);
  auto g1 = gradients(params, batch.a, batch.p, batch.n, 1.0, 1);
  auto g4 = gradients(params, batch.a, batch.p, batch.n, 1.0, 4);
  // Chunk merge order is fixed, but chunked summation differs from the
  // sequential one, so allow tight floating-point slack.
  CHECK(g1.mean_loss == doctest::Approx(g4.mean_loss).epsilon(1e-12));
  for (std::size_t t = 0; t < g1.grads.size(); ++t)
    for (std::size_t i = 0; i < g1.grads[t].data.size(); ++i)
      CHECK(g1.grads[t].data[i] ==
            doctest::Approx(g4.grads[t].data[i]).epsilon(1e-10));
}

TEST_CASE("invalid batches are rejected") {
  NetworkConfig cfg = fmtest::tiny_config();
  auto params = build_network<double>(cfg, 2);
  std::mt19937_64 rng(3);
  Batch b = random_batch(cfg, 2, rng);
  CHECK_THROWS_AS(gradients(params, b.a, b.p,
                            std::vector<Tensor<double>>{b.n[0]}, 1.0),
                  DimensionError);
  CHECK_THROWS_AS(gradients(params, {}, {}, {}, 1.0), ProtocolError);
  CHECK_THROWS_AS(gradients(params, b.a, b.p, b.n, 0.0), ConfigError);
}
