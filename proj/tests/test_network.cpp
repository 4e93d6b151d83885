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

TEST_CASE("build_network is deterministic for a fixed seed") {
  const NetworkConfig cfg = fmtest::small_config();
  auto a = build_network<float>(cfg, 7);
  auto b = build_network<float>(cfg, 7);
  REQUIRE(a.names == b.names);
  for (std::size_t i = 0; i < a.tensors.size(); ++i)
    CHECK(a.tensors[i].data == b.tensors[i].data);
  auto c = build_network<float>(cfg, 8);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.tensors.size(); ++i)
    if (a.tensors[i].data != c.tensors[i].data) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("default architecture parameter count is frozen") {
  auto params = build_network<float>(NetworkConfig{}, 1);
  const std::size_t n = count_parameters(params);
  CHECK(n == 3370560u);          // regression pin for the default architecture
  CHECK(n >= 1960000u);          // within -30% of the 2.8M design target
  CHECK(n <= 3640000u);          // within +30%
}

TEST_CASE("count_parameters sums element counts") {
  NetworkParams<float> p;
  p.names = {"dense.weight", "dense.bias"};
  p.tensors = {Tensor<float>({5, 10}), Tensor<float>({5})};
  CHECK(count_parameters(p) == 55u);  // 10*5 + 5
  NetworkParams<float> q;
  q.names = {"conv.weight", "conv.bias"};
  q.tensors = {Tensor<float>({4, 1, 3, 3}), Tensor<float>({4})};
  CHECK(count_parameters(q) == 40u);  // 9*4 + 4
}

TEST_CASE("configuration invariants are enforced") {
  SUBCASE("block 2 must pool width only") {
    NetworkConfig cfg;
    cfg.blocks[1].pool = {2, 2};
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("input must be taller than wide") {
    NetworkConfig cfg = fmtest::small_config();
    cfg.input_height = 32;
    cfg.input_width = 96;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("horizontal kernels must be wider than tall") {
    NetworkConfig cfg = fmtest::small_config();
    cfg.blocks[0].h_kernel = {7, 3};
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("vertical kernels must be taller than wide") {
    NetworkConfig cfg = fmtest::small_config();
    cfg.blocks[2].v_kernel = {3, 5};
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("exactly three dual-orientation blocks") {
    NetworkConfig cfg = fmtest::small_config();
    cfg.blocks.pop_back();
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("kernel larger than the feature map") {
    NetworkConfig cfg = fmtest::small_config();
    cfg.input_height = 10;
    cfg.input_width = 6;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("embedding dimension at least 2") {
    NetworkConfig cfg = fmtest::small_config();
    cfg.embedding_dim = 1;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("default config is valid") {
    auto shapes = validate_config(NetworkConfig{});
    CHECK(shapes.front().height == 240);
    CHECK(shapes.front().width == 80);
  }
}

TEST_CASE("dual block shape arithmetic on the default first block") {
  NetworkConfig cfg;  // 240x80, block 1: 32 channels/branch, pool 2x2
  auto params = build_network<float>(cfg, 3);
  std::mt19937_64 rng(17);
  Tensor<float> img = fmtest::random_image<float>(240, 80, rng);
  Tensor<float> out = dual_block_forward(
      img, cfg.blocks[0], params.tensor("block0.h.weight"),
      params.tensor("block0.h.bias"), params.tensor("block0.v.weight"),
      params.tensor("block0.v.bias"));
  CHECK(out.shape == std::vector<int>{64, 120, 40});
}

TEST_CASE("block 2 preserves feature-map height") {
  const NetworkConfig cfg = fmtest::small_config();
  auto shapes = validate_config(cfg);
  // shapes: input, block1, block2, block3, tail..., pooled
  CHECK(shapes[2].height == shapes[1].height);
  CHECK(shapes[2].width == shapes[1].width / cfg.blocks[1].pool.cols);
}

TEST_CASE("constant-zero input yields spatially constant block output") {
  NetworkConfig cfg = fmtest::small_config();
  auto params = build_network<float>(cfg, 5);
  Tensor<float> zero({1, cfg.input_height, cfg.input_width});
  Tensor<float> out = dual_block_forward(
      zero, cfg.blocks[0], params.tensor("block0.h.weight"),
      params.tensor("block0.h.bias"), params.tensor("block0.v.weight"),
      params.tensor("block0.v.bias"));
  for (int c = 0; c < out.dim(0); ++c) {
    const float ref = out.at(c, 0, 0);
    for (int y = 0; y < out.dim(1); ++y)
      for (int x = 0; x < out.dim(2); ++x) CHECK(out.at(c, y, x) == ref);
  }
}

TEST_CASE("kernel larger than the input map is a dimension error") {
  Tensor<float> img({1, 4, 4});
  DualBlockConfig blk{{5, 9}, {9, 5}, 2, {1, 1}};
  Tensor<float> wh({2, 1, 5, 9}), bh({2}), wv({2, 1, 9, 5}), bv({2});
  CHECK_THROWS_AS(dual_block_forward(img, blk, wh, bh, wv, bv),
                  DimensionError);
}

TEST_CASE("embeddings are unit norm for random params and inputs") {
  const NetworkConfig cfg = fmtest::small_config();
  auto params = build_network<float>(cfg, 11);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    auto e = forward_one(params,
                         fmtest::random_image<float>(cfg.input_height,
                                                     cfg.input_width, rng));
    REQUIRE(static_cast<int>(e.size()) == cfg.embedding_dim);
    CHECK(std::abs(static_cast<double>(l2_norm(e)) - 1.0) < 1e-6);
  }
}

TEST_CASE("duplicate images in a batch produce identical embeddings") {
  const NetworkConfig cfg = fmtest::small_config();
  auto params = build_network<float>(cfg, 11);
  std::mt19937_64 rng(29);
  Tensor<float> img =
      fmtest::random_image<float>(cfg.input_height, cfg.input_width, rng);
  std::vector<Tensor<float>> batch = {
      img, fmtest::random_image<float>(cfg.input_height, cfg.input_width, rng),
      img};
  auto out = forward(params, batch, 2);
  CHECK(out[0] == out[2]);
  CHECK(out[0] != out[1]);
}

TEST_CASE("wrong input size is a dimension error") {
  const NetworkConfig cfg = fmtest::small_config();
  auto params = build_network<float>(cfg, 11);
  Tensor<float> bad({1, cfg.input_height / 2, cfg.input_width});
  CHECK_THROWS_AS(forward_one(params, bad), DimensionError);
}

TEST_CASE("fresh-network embeddings of independent inputs spread near 2") {
  // Monte-Carlo oracle: truly independent random unit vectors concentrate
  // their squared distance at 2 (E|u-v|^2 = 2 for isotropic unit vectors).
  std::mt19937_64 orng(31);
  double oracle = 0.0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    auto u = fmtest::random_unit_vector(128, orng);
    auto v = fmtest::random_unit_vector(128, orng);
    oracle += squared_l2(u, v);
  }
  oracle /= trials;
  CHECK(oracle > 1.9);
  CHECK(oracle < 2.1);

  // A freshly built network should reproduce this behavior on independent
  // random images instead of collapsing them to one region of the sphere.
  const NetworkConfig cfg = fmtest::small_config();
  auto params = build_network<float>(cfg, 7);
  std::mt19937_64 rng(37);
  double mean = 0.0;
  const int pairs = 100;
  for (int i = 0; i < pairs; ++i) {
    auto a = forward_one(params,
                         fmtest::random_image<float>(cfg.input_height,
                                                     cfg.input_width, rng));
    auto b = forward_one(params,
                         fmtest::random_image<float>(cfg.input_height,
                                                     cfg.input_width, rng));
    mean += static_cast<double>(squared_l2(a, b));
  }
  mean /= pairs;
  CHECK(mean > 1.5);
  CHECK(mean < 2.5);
}

TEST_CASE("convolution is translation equivariant in the interior") {
  std::mt19937_64 rng(41);
  Tensor<double> x({1, 16, 24});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : x.data) v = u(rng);
  Tensor<double> w({3, 1, 3, 5}), b({3});
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  for (auto& v : w.data) v = g(rng);
  for (auto& v : b.data) v = g(rng);

  const int shift = 2;  // one block-1 pooled stride
  Tensor<double> xs({1, 16, 24});
  for (int y = 0; y < 16; ++y)
    for (int c = shift; c < 24; ++c) xs.at(0, y, c) = x.at(0, y, c - shift);

  Tensor<double> y0 = conv2d_same(x, w, b);
  Tensor<double> y1 = conv2d_same(xs, w, b);
  // Interior: stay clear of the zero-padding halo and the shifted-in border.
  for (int c = 0; c < 3; ++c)
    for (int yy = 2; yy < 14; ++yy)
      for (int xx = shift + 3; xx < 21; ++xx)
        CHECK(y1.at(c, yy, xx) ==
              doctest::Approx(y0.at(c, yy, xx - shift)).epsilon(1e-12));
}
