// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_TESTS_HELPERS_HPP
#define FINGERMATCH_TESTS_HELPERS_HPP

#include <random>
#include <vector>

#include "fingermatch/network.hpp"
#include "fingermatch/tensor.hpp"

namespace fmtest {

// Small but structurally complete network (3 dual blocks) used for gradient
// checks and fast training tests.
inline fingermatch::NetworkConfig tiny_config(int height = 16, int width = 12,
                                              int channels = 2,
                                              int embedding_dim = 8) {
  fingermatch::NetworkConfig cfg;
  cfg.input_height = height;
  cfg.input_width = width;
  cfg.blocks = {
      {{1, 3}, {3, 1}, channels, {2, 2}},
      {{1, 3}, {3, 1}, channels, {1, 2}},
      {{1, 3}, {3, 1}, channels, {1, 1}},
  };
  cfg.tail_conv_channels = {};
  cfg.tail_pool = {1, 1};
  cfg.embedding_dim = embedding_dim;
  return cfg;
}

// Mid-size config for end-to-end style tests on small images.
inline fingermatch::NetworkConfig small_config(int height = 96, int width = 32) {
  fingermatch::NetworkConfig cfg;
  cfg.input_height = height;
  cfg.input_width = width;
  cfg.blocks = {
      {{3, 7}, {7, 3}, 8, {2, 2}},
      {{3, 5}, {5, 3}, 12, {1, 2}},
      {{3, 5}, {5, 3}, 16, {2, 2}},
  };
  cfg.tail_conv_channels = {32};
  cfg.tail_pool = {2, 2};
  cfg.embedding_dim = 128;
  return cfg;
}

template <typename T>
fingermatch::Tensor<T> random_image(int height, int width,
                                    std::mt19937_64& rng) {
  fingermatch::Tensor<T> img({1, height, width});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (T& v : img.data) v = static_cast<T>(u(rng));
  return img;
}

inline std::vector<double> random_unit_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : v) {
      x = g(rng);
      n2 += x * x;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

// Random orthogonal matrix via Gram-Schmidt on Gaussian columns.
inline std::vector<std::vector<double>> random_rotation_matrix(
    int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> q;
  while (static_cast<int>(q.size()) < dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (double& x : v) x = g(rng);
    for (const auto& u : q) {
      double dot = 0.0;
      for (int i = 0; i < dim; ++i) dot += u[i] * v[i];
      for (int i = 0; i < dim; ++i) v[i] -= dot * u[i];
    }
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    if (n2 < 1e-12) continue;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
    q.push_back(std::move(v));
  }
  return q;
}

inline std::vector<double> apply_rotation(
    const std::vector<std::vector<double>>& q, const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t r = 0; r < v.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) out[r] += q[r][c] * v[c];
  return out;
}

}  // namespace fmtest

#endif  // FINGERMATCH_TESTS_HELPERS_HPP
