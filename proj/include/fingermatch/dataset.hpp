// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_DATASET_HPP
#define FINGERMATCH_DATASET_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fingermatch/errors.hpp"
#include "fingermatch/image.hpp"

namespace fingermatch {

enum class Component { kMajor, kMinor, kNail, kFull };

inline std::string to_string(Component c) {
  switch (c) {
    case Component::kMajor: return "major";
    case Component::kMinor: return "minor";
    case Component::kNail: return "nail";
    case Component::kFull: return "full";
  }
  throw ConfigError("invalid component");
}

inline Component component_from_string(const std::string& s) {
  if (s == "major") return Component::kMajor;
  if (s == "minor") return Component::kMinor;
  if (s == "nail") return Component::kNail;
  if (s == "full") return Component::kFull;
  throw LoadError("unknown component '" + s + "'");
}

struct ImageSample {
  Image image;
  int subject = -1;
  Component component = Component::kFull;
  int index = -1;       // sample index within (subject, component)
  std::string path;
};

struct ManifestEntry {
  std::string path;
  int subject = -1;
  Component component = Component::kFull;
  int index = -1;
};

struct DatasetManifest {
  std::filesystem::path root;  // directory the paths are relative to
  std::vector<ManifestEntry> entries;
};

// CSV with header `path,subject,component,index`.
inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open manifest: " + path);
  DatasetManifest m;
  m.root = std::filesystem::path(path).parent_path();
  std::string line;
  int lineno = 0;
  std::set<std::tuple<int, Component, int>> seen;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "path,subject,component,index")
        throw LoadError("bad manifest header at " + path + ":1");
      continue;
    }
    std::istringstream ls(line);
    std::string p, subj, comp, idx;
    if (!std::getline(ls, p, ',') || !std::getline(ls, subj, ',') ||
        !std::getline(ls, comp, ',') || !std::getline(ls, idx))
      throw LoadError("malformed manifest row at " + path + ":" +
                      std::to_string(lineno));
    ManifestEntry e;
    e.path = p;
    try {
      e.subject = std::stoi(subj);
      e.index = std::stoi(idx);
    } catch (const std::exception&) {
      throw LoadError("non-numeric field at " + path + ":" +
                      std::to_string(lineno));
    }
    e.component = component_from_string(comp);
    if (!seen.insert({e.subject, e.component, e.index}).second)
      throw LoadError("duplicate (subject,component,index) at " + path + ":" +
                      std::to_string(lineno));
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write manifest: " + path);
  os << "path,subject,component,index\n";
  for (const auto& e : m.entries)
    os << e.path << "," << e.subject << "," << to_string(e.component) << ","
       << e.index << "\n";
  if (!os) throw IoError("write failed: " + path);
}

inline ImageSample load_sample(const DatasetManifest& m,
                               const ManifestEntry& e) {
  ImageSample s;
  s.path = (m.root / e.path).string();
  s.image = load_image(s.path);
  s.subject = e.subject;
  s.component = e.component;
  s.index = e.index;
  return s;
}

inline std::vector<ManifestEntry> filter_component(
    const std::vector<ManifestEntry>& entries, Component c) {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.component == c) out.push_back(e);
  return out;
}

struct SplitProtocol {
  std::string name = "default";
  int train_per_subject = 2;
  int test_per_subject = 3;
};

struct Split {
  std::vector<ManifestEntry> gallery;  // first train_per_subject by index
  std::vector<ManifestEntry> probe;    // next test_per_subject by index
};

/// Deterministic split by ascending sample index within each subject.
inline Split split(const std::vector<ManifestEntry>& entries,
                   const SplitProtocol& protocol) {
  std::map<int, std::vector<ManifestEntry>> by_subject;
  for (const auto& e : entries) by_subject[e.subject].push_back(e);
  Split out;
  for (auto& [subject, list] : by_subject) {
    std::sort(list.begin(), list.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                return a.index < b.index;
              });
    const int need = protocol.train_per_subject + protocol.test_per_subject;
    if (static_cast<int>(list.size()) < need)
      throw ProtocolError("subject " + std::to_string(subject) + " has " +
                          std::to_string(list.size()) + " samples, protocol '" +
                          protocol.name + "' needs " + std::to_string(need));
    for (int i = 0; i < protocol.train_per_subject; ++i)
      out.gallery.push_back(list[static_cast<std::size_t>(i)]);
    for (int i = 0; i < protocol.test_per_subject; ++i)
      out.probe.push_back(
          list[static_cast<std::size_t>(protocol.train_per_subject + i)]);
  }
  return out;
}

struct PairCounts {
  std::uint64_t genuine = 0;
  std::uint64_t impostor = 0;
};

/// Genuine/impostor pair counts for the full gallery x probe cross product,
/// computed from label tallies without materializing scores.
inline PairCounts pair_counts(const std::vector<int>& gallery_subjects,
                              const std::vector<int>& probe_subjects) {
  std::map<int, std::uint64_t> g, p;
  for (int s : gallery_subjects) ++g[s];
  for (int s : probe_subjects) ++p[s];
  PairCounts out;
  const std::uint64_t total = static_cast<std::uint64_t>(gallery_subjects.size()) *
                              static_cast<std::uint64_t>(probe_subjects.size());
  for (const auto& [s, gc] : g) {
    auto it = p.find(s);
    if (it != p.end()) out.genuine += gc * it->second;
  }
  out.impostor = total - out.genuine;
  return out;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_DATASET_HPP
