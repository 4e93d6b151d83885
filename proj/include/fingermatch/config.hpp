// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_CONFIG_HPP
#define FINGERMATCH_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fingermatch/augment.hpp"
#include "fingermatch/dataset.hpp"
#include "fingermatch/errors.hpp"
#include "fingermatch/network.hpp"
#include "fingermatch/parallel.hpp"
#include "fingermatch/synth.hpp"
#include "fingermatch/trainer.hpp"

namespace fingermatch {

/// Flat typed key-value run configuration with section-prefixed keys
/// ("network.input_height=240"). Unknown keys are rejected; flags override
/// file values; the full effective config is dumpable and hashable.
class RunConfig {
 public:
  RunConfig() : values_(defaults()) {}

  static std::map<std::string, std::string> defaults() {
    return {
        {"seed", "7"},
        {"threads", std::to_string(default_threads())},
        {"network.input_height", "240"},
        {"network.input_width", "80"},
        {"network.embedding_dim", "128"},
        {"network.block1.h_kernel", "5x9"},
        {"network.block1.v_kernel", "9x5"},
        {"network.block1.channels", "32"},
        {"network.block1.pool", "2x2"},
        {"network.block2.h_kernel", "3x7"},
        {"network.block2.v_kernel", "7x3"},
        {"network.block2.channels", "64"},
        {"network.block2.pool", "1x2"},
        {"network.block3.h_kernel", "3x5"},
        {"network.block3.v_kernel", "5x3"},
        {"network.block3.channels", "96"},
        {"network.block3.pool", "2x2"},
        {"network.tail_channels", "128,128"},
        {"network.tail_pool", "2x2"},
        {"train.batch_triplets", "35"},
        {"train.epochs", "500"},
        {"train.candidate_pool", "1000"},
        {"train.lr", "0.001"},
        {"train.beta1", "0.9"},
        {"train.beta2", "0.999"},
        {"train.eps", "1e-8"},
        {"train.margin_init", "0.2"},
        {"train.margin_step", "0.05"},
        {"train.margin_max", "0.5"},
        {"train.margin_schedule", "adaptive"},
        {"train.yield_threshold", "0.1"},
        {"train.yield_patience", "3"},
        {"train.margin_fixed_every", "75"},
        {"augment.target_per_subject", "35"},
        {"augment.rotation_deg", "10"},
        {"augment.zoom_min", "0.9"},
        {"augment.zoom_max", "1.1"},
        {"augment.distortion_px", "4"},
        {"augment.smoothing_px", "16"},
        {"protocol.name", "2-3"},
        {"protocol.train_per_subject", "2"},
        {"protocol.test_per_subject", "3"},
        {"protocol.component", "full"},
        {"synth.identities", "50"},
        {"synth.samples", "5"},
        {"synth.height", "240"},
        {"synth.width", "80"},
        {"synth.creases_min", "3"},
        {"synth.creases_max", "6"},
        {"synth.jitter_px", "2.5"},
        {"synth.jitter_deg", "3"},
        {"synth.jitter_gain", "0.05"},
        {"synth.shade", "0.06"},
        {"synth.pixel_noise", "0.14"},
    };
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    it->second = value;
  }

  void load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw LoadError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("missing '=' at " + path + ":" +
                          std::to_string(lineno));
      try {
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " at " + path + ":" +
                          std::to_string(lineno));
      }
    }
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
  }

  int get_int(const std::string& key) const {
    try {
      return std::stoi(get(key));
    } catch (const std::exception&) {
      throw ConfigError("key " + key + " is not an integer: " + get(key));
    }
  }

  double get_double(const std::string& key) const {
    try {
      return std::stod(get(key));
    } catch (const std::exception&) {
      throw ConfigError("key " + key + " is not a number: " + get(key));
    }
  }

  std::uint64_t get_u64(const std::string& key) const {
    try {
      return std::stoull(get(key));
    } catch (const std::exception&) {
      throw ConfigError("key " + key + " is not an integer: " + get(key));
    }
  }

  /// Effective configuration, one key=value per line, keys sorted.
  std::string dump() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << "=" << v << "\n";
    return os.str();
  }

  /// FNV-1a hash of the dumped config, for run logging.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : dump()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

  NetworkConfig network() const {
    NetworkConfig n;
    n.input_height = get_int("network.input_height");
    n.input_width = get_int("network.input_width");
    n.embedding_dim = get_int("network.embedding_dim");
    n.blocks.clear();
    for (int b = 1; b <= 3; ++b) {
      const std::string base = "network.block" + std::to_string(b);
      DualBlockConfig blk;
      blk.h_kernel = parse_shape<KernelShape>(base + ".h_kernel");
      blk.v_kernel = parse_shape<KernelShape>(base + ".v_kernel");
      blk.channels_per_branch = get_int(base + ".channels");
      blk.pool = parse_shape<PoolShape>(base + ".pool");
      n.blocks.push_back(blk);
    }
    n.tail_conv_channels = parse_int_list("network.tail_channels");
    n.tail_pool = parse_shape<PoolShape>("network.tail_pool");
    return n;
  }

  TrainConfig trainer() const {
    TrainConfig t;
    t.batch_triplets = get_int("train.batch_triplets");
    t.epochs = get_int("train.epochs");
    t.candidate_pool = get_int("train.candidate_pool");
    t.adam.lr = get_double("train.lr");
    t.adam.beta1 = get_double("train.beta1");
    t.adam.beta2 = get_double("train.beta2");
    t.adam.eps = get_double("train.eps");
    t.margin_init = get_double("train.margin_init");
    t.margin_step = get_double("train.margin_step");
    t.margin_max = get_double("train.margin_max");
    const std::string sched = get("train.margin_schedule");
    if (sched == "adaptive")
      t.margin_schedule = MarginSchedule::kAdaptive;
    else if (sched == "fixed")
      t.margin_schedule = MarginSchedule::kFixedEpochs;
    else
      throw ConfigError("train.margin_schedule must be adaptive or fixed");
    t.yield_threshold = get_double("train.yield_threshold");
    t.yield_patience = get_int("train.yield_patience");
    t.margin_fixed_every = get_int("train.margin_fixed_every");
    t.seed = get_u64("seed");
    t.threads = get_int("threads");
    return t;
  }

  AugmentConfig augment() const {
    AugmentConfig a;
    a.target_per_subject = get_int("augment.target_per_subject");
    a.rotation_deg = get_double("augment.rotation_deg");
    a.zoom_min = get_double("augment.zoom_min");
    a.zoom_max = get_double("augment.zoom_max");
    a.distortion_px = get_double("augment.distortion_px");
    a.smoothing_px = get_double("augment.smoothing_px");
    a.seed = get_u64("seed");
    if (a.zoom_max < a.zoom_min) throw ConfigError("augment zoom range empty");
    if (a.distortion_px < 0) throw ConfigError("augment.distortion_px < 0");
    return a;
  }

  SplitProtocol protocol() const {
    SplitProtocol p;
    p.name = get("protocol.name");
    p.train_per_subject = get_int("protocol.train_per_subject");
    p.test_per_subject = get_int("protocol.test_per_subject");
    return p;
  }

  Component protocol_component() const {
    return component_from_string(get("protocol.component"));
  }

  SynthConfig synth() const {
    SynthConfig s;
    s.identities = get_int("synth.identities");
    s.samples_per_identity = get_int("synth.samples");
    s.height = get_int("synth.height");
    s.width = get_int("synth.width");
    s.creases_min = get_int("synth.creases_min");
    s.creases_max = get_int("synth.creases_max");
    s.jitter_px = get_double("synth.jitter_px");
    s.jitter_deg = get_double("synth.jitter_deg");
    s.jitter_gain = get_double("synth.jitter_gain");
    s.shade = get_double("synth.shade");
    s.pixel_noise = get_double("synth.pixel_noise");
    s.seed = get_u64("seed");
    return s;
  }

 private:
  template <typename S>
  S parse_shape(const std::string& key) const {
    const std::string& v = get(key);
    const auto x = v.find('x');
    if (x == std::string::npos)
      throw ConfigError("key " + key + " must look like RxC, got " + v);
    S s;
    try {
      s.rows = std::stoi(v.substr(0, x));
      s.cols = std::stoi(v.substr(x + 1));
    } catch (const std::exception&) {
      throw ConfigError("key " + key + " must look like RxC, got " + v);
    }
    return s;
  }

  std::vector<int> parse_int_list(const std::string& key) const {
    const std::string& v = get(key);
    std::vector<int> out;
    if (v.empty() || v == "none") return out;
    std::istringstream is(v);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      try {
        out.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("key " + key + " has a non-integer entry: " + tok);
      }
    }
    return out;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace fingermatch

#endif  // FINGERMATCH_CONFIG_HPP
