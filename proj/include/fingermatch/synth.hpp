// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_SYNTH_HPP
#define FINGERMATCH_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fingermatch/dataset.hpp"
#include "fingermatch/errors.hpp"
#include "fingermatch/image.hpp"

namespace fingermatch {

// Band layout of a synthetic full-finger image (fractions of the height).
inline constexpr double kNailBandEnd = 0.28;
inline constexpr double kMajorBandEnd = 0.64;

struct SynthConfig {
  int identities = 50;
  int samples_per_identity = 5;
  int height = 240;             // full image; components are row crops
  int width = 80;
  int creases_min = 3;
  int creases_max = 6;
  double jitter_px = 2.5;       // per-sample translation
  double jitter_deg = 3.0;      // per-sample rotation
  double jitter_gain = 0.05;    // per-sample illumination scale
  double shade = 0.06;          // per-sample smooth shading amplitude
  double pixel_noise = 0.14;    // per-sample additive Gaussian noise
  std::uint64_t seed = 0;
};

inline void validate(const SynthConfig& c) {
  if (c.identities < 2) throw ConfigError("synth identities must be >= 2");
  if (c.samples_per_identity < 2) throw ConfigError("synth samples must be >= 2");
  if (c.height < 16 || c.width < 8) throw ConfigError("synth image too small");
  if (c.creases_min < 1 || c.creases_max < c.creases_min)
    throw ConfigError("bad crease count range");
}

namespace detail {

struct Crease {
  double center_y;    // pixels
  double slope;       // dy per dx
  double curvature;   // quadratic bend across the width
  double thickness;   // Gaussian sigma, pixels
  double depth;       // darkening amount
};

struct Wave {
  double fy, fx, phase, amp;
};

// Identity-persistent texture parameters. Samples of one identity re-render
// this model under small pose/illumination jitter.
struct IdentityModel {
  double base;
  std::vector<Wave> waves;
  std::vector<Crease> creases;
  double nail_cy, nail_cx, nail_ry, nail_rx, nail_gain;
};

inline IdentityModel draw_identity(const SynthConfig& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  IdentityModel m;
  // Brightness is deliberately not an identity cue: per-sample illumination
  // jitter would otherwise be dwarfed by it, and real acquisition brightness
  // is dominated by the sensor, not the subject.
  m.base = 0.52;
  const int waves = 3;
  for (int i = 0; i < waves; ++i) {
    Wave w;
    w.fy = (0.5 + 2.5 * u(rng)) * 2.0 * M_PI / c.height;
    w.fx = (0.5 + 2.5 * u(rng)) * 2.0 * M_PI / c.width;
    w.phase = 2.0 * M_PI * u(rng);
    w.amp = 0.008 + 0.008 * u(rng);
    m.waves.push_back(w);
  }
  std::uniform_int_distribution<int> nc(c.creases_min, c.creases_max);
  auto add_creases = [&](double band_lo, double band_hi, int count) {
    for (int i = 0; i < count; ++i) {
      Crease cr;
      cr.center_y = (band_lo + (band_hi - band_lo) * u(rng)) * c.height;
      cr.slope = -0.15 + 0.3 * u(rng);
      cr.curvature = (-0.5 + 1.0 * u(rng)) * 8.0;
      cr.thickness = (1.0 + 1.5 * u(rng)) * (c.height / 240.0 + 0.5);
      cr.depth = 0.05 + 0.05 * u(rng);
      m.creases.push_back(cr);
    }
  };
  add_creases(kNailBandEnd + 0.03, kMajorBandEnd - 0.03, nc(rng));
  add_creases(kMajorBandEnd + 0.03, 0.97, nc(rng));
  m.nail_cy = (0.13 + 0.02 * u(rng)) * c.height;
  m.nail_cx = (0.47 + 0.06 * u(rng)) * c.width;
  m.nail_ry = (0.08 + 0.01 * u(rng)) * c.height;
  m.nail_rx = (0.27 + 0.04 * u(rng)) * c.width;
  m.nail_gain = 0.10;
  return m;
}

// Canonical texture value at continuous coordinates (in pixels).
inline double identity_value(const IdentityModel& m, double y, double x) {
  double v = m.base;
  for (const Wave& w : m.waves)
    v += w.amp * std::sin(w.fy * y + w.fx * x + w.phase);
  for (const Crease& cr : m.creases) {
    const double xr = x - m.nail_cx;  // bend around the finger axis
    const double cy = cr.center_y + cr.slope * xr +
                      cr.curvature * xr * xr / (m.nail_rx * 8.0 + 1.0);
    const double d = y - cy;
    v -= cr.depth * std::exp(-0.5 * d * d / (cr.thickness * cr.thickness));
  }
  const double ey = (y - m.nail_cy) / m.nail_ry;
  const double ex = (x - m.nail_cx) / m.nail_rx;
  const double r2 = ey * ey + ex * ex;
  if (r2 < 1.44) v += m.nail_gain * std::exp(-1.5 * std::max(0.0, r2 - 0.25));
  return v;
}

}  // namespace detail

struct SynthSample {
  int subject;
  int index;
  Image full, major, minor, nail;
};

/// Renders one identity's samples: small random pose and illumination jitter
/// on top of a persistent identity model, so within-identity variation stays
/// well below between-identity variation. Component images are row crops of
/// the full image.
inline std::vector<SynthSample> render_identity(const SynthConfig& cfg,
                                                int subject,
                                                std::mt19937_64& rng) {
  detail::IdentityModel model = detail::draw_identity(cfg, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SynthSample> out;
  for (int s = 0; s < cfg.samples_per_identity; ++s) {
    const double ty = u(rng) * cfg.jitter_px;
    const double tx = u(rng) * cfg.jitter_px;
    const double rot = u(rng) * cfg.jitter_deg * M_PI / 180.0;
    const double gain = 1.0 + u(rng) * cfg.jitter_gain;
    const double offset = u(rng) * 0.04;
    // Per-sample uneven illumination: a linear gradient plus one smooth wave.
    const double grad_y = u(rng) * cfg.shade;
    const double grad_x = u(rng) * cfg.shade;
    const double shade_fy = (0.5 + u(rng) * 0.5) * 2.0 * M_PI / cfg.height;
    const double shade_fx = (0.5 + u(rng) * 0.5) * 2.0 * M_PI / cfg.width;
    const double shade_phase = M_PI * u(rng);
    const double shade_amp = cfg.shade * (0.6 + 0.4 * u(rng));
    const double cy = (cfg.height - 1) / 2.0, cx = (cfg.width - 1) / 2.0;
    const double cr = std::cos(rot), sr = std::sin(rot);
    Image full(cfg.height, cfg.width);
    for (int y = 0; y < cfg.height; ++y) {
      for (int x = 0; x < cfg.width; ++x) {
        const double dy = y - cy, dx = x - cx;
        const double sy = cy + cr * dy - sr * dx + ty;
        const double sx = cx + sr * dy + cr * dx + tx;
        double v = detail::identity_value(model, sy, sx);
        v += grad_y * (y / static_cast<double>(cfg.height) - 0.5) +
             grad_x * (x / static_cast<double>(cfg.width) - 0.5) +
             shade_amp * std::sin(shade_fy * y + shade_fx * x + shade_phase);
        v = v * gain + offset + gauss(rng) * cfg.pixel_noise;
        full.at(y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
    const int nail_end = static_cast<int>(kNailBandEnd * cfg.height);
    const int major_end = static_cast<int>(kMajorBandEnd * cfg.height);
    auto crop_rows = [&](int r0, int r1) {
      Image c(r1 - r0, cfg.width);
      for (int y = r0; y < r1; ++y)
        for (int x = 0; x < cfg.width; ++x) c.at(y - r0, x) = full.at(y, x);
      return c;
    };
    SynthSample sample;
    sample.subject = subject;
    sample.index = s;
    sample.nail = crop_rows(0, nail_end);
    sample.major = crop_rows(nail_end, major_end);
    sample.minor = crop_rows(major_end, cfg.height);
    sample.full = std::move(full);
    out.push_back(std::move(sample));
  }
  return out;
}

/// Writes the full synthetic dataset (4 component images per sample) plus a
/// manifest CSV under `out_dir`. Deterministic for a fixed seed.
inline DatasetManifest generate_synthetic(const SynthConfig& cfg,
                                          const std::string& out_dir) {
  validate(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "images");
  DatasetManifest manifest;
  manifest.root = out_dir;
  std::mt19937_64 rng(cfg.seed);
  for (int id = 0; id < cfg.identities; ++id) {
    for (const SynthSample& s : render_identity(cfg, id, rng)) {
      auto emit = [&](const Image& img, Component comp) {
        const std::string rel = "images/s" + std::to_string(id) + "_i" +
                                std::to_string(s.index) + "_" +
                                to_string(comp) + ".png";
        save_image((fs::path(out_dir) / rel).string(), img);
        manifest.entries.push_back({rel, id, comp, s.index});
      };
      emit(s.major, Component::kMajor);
      emit(s.minor, Component::kMinor);
      emit(s.nail, Component::kNail);
      emit(s.full, Component::kFull);
    }
  }
  save_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
  return manifest;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_SYNTH_HPP
