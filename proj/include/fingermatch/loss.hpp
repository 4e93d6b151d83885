// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_LOSS_HPP
#define FINGERMATCH_LOSS_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

#include "fingermatch/errors.hpp"

namespace fingermatch {

/// Squared L2 distance between two embeddings (the raw match score).
template <typename T>
T squared_l2(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size())
    throw DimensionError("embedding dimensions differ");
  T s = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    T d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Same-subject pair loss: squared distance itself.
template <typename T>
T positive_pair_loss(const std::vector<T>& p, const std::vector<T>& q) {
  return squared_l2(p, q);
}

/// Different-subject pair loss: hinge on how far the pair falls short of the
/// margin.
template <typename T>
T negative_pair_loss(const std::vector<T>& p, const std::vector<T>& q, T beta) {
  return std::max(T(0), beta - squared_l2(p, q));
}

template <typename T>
T triplet_loss(const std::vector<T>& a, const std::vector<T>& p,
               const std::vector<T>& n, T beta) {
  return std::max(T(0), squared_l2(a, p) - squared_l2(a, n) + beta);
}

template <typename T>
T batch_positive_pair_loss(const std::vector<std::vector<T>>& ps,
                           const std::vector<std::vector<T>>& qs) {
  T s = T(0);
  for (std::size_t i = 0; i < ps.size(); ++i)
    s += positive_pair_loss(ps[i], qs[i]);
  return s / static_cast<T>(ps.size());
}

template <typename T>
T batch_negative_pair_loss(const std::vector<std::vector<T>>& ps,
                           const std::vector<std::vector<T>>& qs, T beta) {
  T s = T(0);
  for (std::size_t i = 0; i < ps.size(); ++i)
    s += negative_pair_loss(ps[i], qs[i], beta);
  return s / static_cast<T>(ps.size());
}

template <typename T>
T batch_triplet_loss(const std::vector<std::vector<T>>& as,
                     const std::vector<std::vector<T>>& ps,
                     const std::vector<std::vector<T>>& ns, T beta) {
  T s = T(0);
  for (std::size_t i = 0; i < as.size(); ++i)
    s += triplet_loss(as[i], ps[i], ns[i], beta);
  return s / static_cast<T>(as.size());
}

}  // namespace fingermatch

#endif  // FINGERMATCH_LOSS_HPP
