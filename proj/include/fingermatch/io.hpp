// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_IO_HPP
#define FINGERMATCH_IO_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fingermatch/errors.hpp"
#include "fingermatch/trainer.hpp"

namespace fingermatch {

/// Shortest round-trip decimal representation; byte-stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw LoadError("bad numeric value '" + s + "' in " + what);
  return v;
}

// --- loss trace CSV (`iter,loss,beta,yield`) -------------------------------

inline void save_loss_trace(const LossTrace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write loss trace: " + path);
  os << "iter,loss,beta,yield\n";
  for (const auto& r : trace)
    os << r.iter << "," << format_double(r.loss) << "," << format_double(r.beta)
       << "," << format_double(r.yield) << "\n";
  if (!os) throw IoError("write failed: " + path);
}

// --- score CSV (`probe,gallery,label,score`; label 1 = genuine) -------------

struct ScoreRow {
  std::string probe;
  std::string gallery;
  int label = 0;
  double score = 0.0;
};

inline void save_scores(const std::vector<ScoreRow>& rows,
                        const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write scores: " + path);
  os << "probe,gallery,label,score\n";
  for (const auto& r : rows)
    os << r.probe << "," << r.gallery << "," << r.label << ","
       << format_double(r.score) << "\n";
  if (!os) throw IoError("write failed: " + path);
}

inline std::vector<ScoreRow> load_scores(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open scores: " + path);
  std::vector<ScoreRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "probe,gallery,label,score")
        throw LoadError("bad score header at " + path + ":1");
      continue;
    }
    std::istringstream ls(line);
    ScoreRow r;
    std::string label, score;
    if (!std::getline(ls, r.probe, ',') || !std::getline(ls, r.gallery, ',') ||
        !std::getline(ls, label, ',') || !std::getline(ls, score))
      throw LoadError("malformed score row at " + path + ":" +
                      std::to_string(lineno));
    if (label != "0" && label != "1")
      throw LoadError("label must be 0 or 1 at " + path + ":" +
                      std::to_string(lineno));
    r.label = label == "1" ? 1 : 0;
    r.score = parse_double(score, path + ":" + std::to_string(lineno));
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- embedding CSV -----------------------------------------------------------

inline void save_embeddings(const std::vector<std::string>& keys,
                            const std::vector<std::vector<float>>& embeddings,
                            const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write embeddings: " + path);
  os << "key";
  if (!embeddings.empty())
    for (std::size_t d = 0; d < embeddings.front().size(); ++d) os << ",e" << d;
  os << "\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    os << keys[i];
    for (float v : embeddings[i])
      os << "," << format_double(static_cast<double>(v));
    os << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace fingermatch

#endif  // FINGERMATCH_IO_HPP
