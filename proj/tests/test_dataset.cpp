// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fingermatch/dataset.hpp"
#include "fingermatch/synth.hpp"

using namespace fingermatch;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("fingermatch_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("component labels round-trip through strings") {
  for (Component c : {Component::kMajor, Component::kMinor, Component::kNail,
                      Component::kFull})
    CHECK(component_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(component_from_string("thumb"), LoadError);
}

TEST_CASE("manifest save/load round trip") {
  fs::path dir = fresh_dir("manifest");
  DatasetManifest m;
  m.root = dir;
  m.entries = {{"a.png", 0, Component::kFull, 0},
               {"b.png", 0, Component::kFull, 1},
               {"c.png", 1, Component::kMajor, 0}};
  const std::string path = (dir / "manifest.csv").string();
  save_manifest(m, path);
  DatasetManifest loaded = load_manifest(path);
  REQUIRE(loaded.entries.size() == 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(loaded.entries[i].path == m.entries[i].path);
    CHECK(loaded.entries[i].subject == m.entries[i].subject);
    CHECK(loaded.entries[i].component == m.entries[i].component);
    CHECK(loaded.entries[i].index == m.entries[i].index);
  }
}

TEST_CASE("manifest errors name the offending line") {
  fs::path dir = fresh_dir("manifest_err");
  const std::string path = (dir / "bad.csv").string();
  {
    std::ofstream os(path);
    os << "path,subject,component,index\n";
    os << "a.png,0,full,0\n";
    os << "b.png,0,full,0\n";  // duplicate key
  }
  try {
    load_manifest(path);
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_manifest((dir / "missing.csv").string()), LoadError);
}

TEST_CASE("8-bit grayscale scaling and lossless round trip") {
  fs::path dir = fresh_dir("png");
  Image img(12, 9);
  // Values on the 1/255 grid survive the 8-bit round trip bit-exactly.
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 9; ++x)
      img.at(y, x) = static_cast<float>(((y * 9 + x) * 7) % 256) / 255.f;
  img.at(0, 0) = 1.0f;  // pixel value 255
  const std::string path = (dir / "img.png").string();
  save_image(path, img);
  Image back = load_image(path);
  REQUIRE(back.height == 12);
  REQUIRE(back.width == 9);
  CHECK(back.at(0, 0) == 1.0f);
  CHECK(back.pix == img.pix);
}

TEST_CASE("split takes the first samples by index") {
  std::vector<ManifestEntry> entries;
  for (int s = 0; s < 3; ++s)
    for (int i = 4; i >= 0; --i)  // shuffled order on purpose
      entries.push_back({"x.png", s, Component::kFull, i});
  SplitProtocol proto{"2-3", 2, 3};
  Split sp = split(entries, proto);
  REQUIRE(sp.gallery.size() == 6u);
  REQUIRE(sp.probe.size() == 9u);
  for (const auto& e : sp.gallery) CHECK(e.index < 2);
  for (const auto& e : sp.probe) {
    CHECK(e.index >= 2);
    CHECK(e.index <= 4);
  }
}

TEST_CASE("split names the subject with too few samples") {
  std::vector<ManifestEntry> entries = {{"a.png", 0, Component::kFull, 0},
                                        {"b.png", 0, Component::kFull, 1},
                                        {"c.png", 7, Component::kFull, 0}};
  try {
    split(entries, SplitProtocol{"1-1", 1, 1});
    FAIL("expected a protocol error");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("subject 7") != std::string::npos);
  }
}

TEST_CASE("6/6 protocol pair counts on 660 classes") {
  std::vector<int> gallery, probe;
  for (int s = 0; s < 660; ++s)
    for (int i = 0; i < 6; ++i) {
      gallery.push_back(s);
      probe.push_back(s);
    }
  PairCounts pc = pair_counts(gallery, probe);
  CHECK(pc.genuine == 23760u);       // 660 * 36
  CHECK(pc.impostor == 15657840u);   // 660 * 659 * 36
}

TEST_CASE("2/3 protocol pair counts on 50 classes") {
  std::vector<int> gallery, probe;
  for (int s = 0; s < 50; ++s) {
    for (int i = 0; i < 2; ++i) gallery.push_back(s);
    for (int i = 0; i < 3; ++i) probe.push_back(s);
  }
  PairCounts pc = pair_counts(gallery, probe);
  CHECK(pc.genuine == 300u);      // 50 * 2 * 3
  CHECK(pc.impostor == 14700u);   // 50 * 49 * 6
}

TEST_CASE("synthetic generation counts, determinism, and layout") {
  SynthConfig cfg;
  cfg.identities = 50;
  cfg.samples_per_identity = 5;
  cfg.height = 48;
  cfg.width = 16;
  cfg.seed = 123;

  fs::path dir_a = fresh_dir("synth_a");
  fs::path dir_b = fresh_dir("synth_b");
  DatasetManifest a = generate_synthetic(cfg, dir_a.string());
  DatasetManifest b = generate_synthetic(cfg, dir_b.string());

  CHECK(a.entries.size() == 1000u);  // 50 * 5 * 4 components
  std::map<Component, int> per_component;
  for (const auto& e : a.entries) ++per_component[e.component];
  for (const auto& [c, n] : per_component) CHECK(n == 250);

  // Same seed, different directory: identical manifest text and image bytes.
  CHECK(slurp(dir_a / "manifest.csv") == slurp(dir_b / "manifest.csv"));
  for (std::size_t i = 0; i < a.entries.size(); i += 97)
    CHECK(slurp(dir_a / a.entries[i].path) == slurp(dir_b / a.entries[i].path));

  // Every referenced file exists and loads.
  for (std::size_t i = 0; i < a.entries.size(); i += 101)
    CHECK(load_sample(a, a.entries[i]).image.width == cfg.width);
}

TEST_CASE("synthetic components are crops of the full image") {
  SynthConfig cfg;
  cfg.identities = 2;
  cfg.samples_per_identity = 2;
  cfg.height = 100;
  cfg.width = 20;
  cfg.seed = 5;
  std::mt19937_64 rng(cfg.seed);
  auto samples = render_identity(cfg, 0, rng);
  REQUIRE(samples.size() == 2u);
  const SynthSample& s = samples[0];
  const int nail_end = static_cast<int>(kNailBandEnd * cfg.height);
  const int major_end = static_cast<int>(kMajorBandEnd * cfg.height);
  REQUIRE(s.nail.height == nail_end);
  REQUIRE(s.major.height == major_end - nail_end);
  REQUIRE(s.minor.height == cfg.height - major_end);
  for (int y = 0; y < s.nail.height; ++y)
    for (int x = 0; x < cfg.width; ++x) CHECK(s.nail.at(y, x) == s.full.at(y, x));
  for (int y = 0; y < s.major.height; ++y)
    for (int x = 0; x < cfg.width; ++x)
      CHECK(s.major.at(y, x) == s.full.at(nail_end + y, x));
  for (int y = 0; y < s.minor.height; ++y)
    for (int x = 0; x < cfg.width; ++x)
      CHECK(s.minor.at(y, x) == s.full.at(major_end + y, x));
}

TEST_CASE("synthetic identities are pixel-separable on average") {
  SynthConfig cfg;
  cfg.identities = 8;
  cfg.samples_per_identity = 4;
  cfg.height = 96;
  cfg.width = 32;
  cfg.seed = 31;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<Image>> ids;
  for (int id = 0; id < cfg.identities; ++id) {
    std::vector<Image> imgs;
    for (auto& s : render_identity(cfg, id, rng)) imgs.push_back(s.full);
    ids.push_back(std::move(imgs));
  }
  auto mse = [](const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.pix.size(); ++i) {
      const double d = a.pix[i] - b.pix[i];
      s += d * d;
    }
    return s / static_cast<double>(a.pix.size());
  };
  double within = 0.0, between = 0.0;
  int wn = 0, bn = 0;
  for (int i = 0; i < cfg.identities; ++i)
    for (int j = i; j < cfg.identities; ++j)
      for (std::size_t a = 0; a < ids[i].size(); ++a)
        for (std::size_t b = 0; b < ids[j].size(); ++b) {
          if (i == j && a >= b) continue;
          if (i == j) {
            within += mse(ids[i][a], ids[j][b]);
            ++wn;
          } else {
            between += mse(ids[i][a], ids[j][b]);
            ++bn;
          }
        }
  within /= wn;
  between /= bn;
  INFO("within " << within << " between " << between);
  CHECK(within < between);
}

TEST_CASE("invalid synthetic configs are rejected") {
  SynthConfig cfg;
  cfg.identities = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.identities = 3;
  cfg.samples_per_identity = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.samples_per_identity = 2;
  cfg.creases_min = 5;
  cfg.creases_max = 4;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
