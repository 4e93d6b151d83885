// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_PARALLEL_HPP
#define FINGERMATCH_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fingermatch {

inline int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
}

// Splits [0,n) into `threads` contiguous chunks. Chunk boundaries depend only
// on (n, threads), so any per-chunk accumulation merged in chunk order is
// bitwise reproducible for a fixed thread count.
// fn(chunk_index, begin, end) runs once per nonempty chunk.
inline void parallel_chunks(
    std::size_t n, int threads,
    const std::function<void(int, std::size_t, std::size_t)>& fn) {
  if (threads < 1) threads = 1;
  if (n == 0) return;
  std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (t == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errs(t);
  std::size_t base = n / t, rem = n % t, begin = 0;
  for (std::size_t c = 0; c < t; ++c) {
    std::size_t len = base + (c < rem ? 1 : 0);
    std::size_t end = begin + len;
    workers.emplace_back([&fn, &errs, c, begin, end] {
      try {
        fn(static_cast<int>(c), begin, end);
      } catch (...) {
        errs[c] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& w : workers) w.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace fingermatch

#endif  // FINGERMATCH_PARALLEL_HPP
