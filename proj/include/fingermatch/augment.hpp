// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_AUGMENT_HPP
#define FINGERMATCH_AUGMENT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "fingermatch/dataset.hpp"
#include "fingermatch/errors.hpp"
#include "fingermatch/image.hpp"

namespace fingermatch {

struct AugmentConfig {
  int target_per_subject = 35;
  double rotation_deg = 10.0;     // rotation drawn from [-x, +x]
  double zoom_min = 0.9;
  double zoom_max = 1.1;
  double distortion_px = 4.0;     // peak displacement of the elastic field
  double smoothing_px = 16.0;     // Gaussian sigma of the field
  std::uint64_t seed = 0;
};

inline Image random_rotation(const Image& img, double angle_deg) {
  Image out = rotate_image(img, angle_deg);
  clamp_01(out);
  return out;
}

inline Image random_zoom(const Image& img, double scale) {
  Image out = zoom_image(img, scale);
  clamp_01(out);
  return out;
}

/// Elastic warp: a smoothed random displacement field rescaled so its peak
/// magnitude is `strength_px`.
inline Image random_distortion(const Image& img, double strength_px,
                               double smoothing_px, std::mt19937_64& rng) {
  const std::size_t n = img.pix.size();
  std::vector<float> dy(n), dx(n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) dy[i] = static_cast<float>(u(rng));
  for (std::size_t i = 0; i < n; ++i) dx[i] = static_cast<float>(u(rng));
  if (strength_px <= 0.0) {
    return img;
  }
  dy = gaussian_blur_field(dy, img.height, img.width, smoothing_px);
  dx = gaussian_blur_field(dx, img.height, img.width, smoothing_px);
  float peak = 0.f;
  for (std::size_t i = 0; i < n; ++i) {
    peak = std::max(peak, std::abs(dy[i]));
    peak = std::max(peak, std::abs(dx[i]));
  }
  if (peak > 0.f) {
    const float scale = static_cast<float>(strength_px) / peak;
    for (std::size_t i = 0; i < n; ++i) dy[i] *= scale;
    for (std::size_t i = 0; i < n; ++i) dx[i] *= scale;
  }
  Image out = distort_image(img, dy, dx);
  clamp_01(out);
  return out;
}

/// Expands one subject's originals to exactly target_per_subject images.
/// Originals come through untouched (and first); augmented copies cycle over
/// the originals applying rotation, then zoom, then elastic distortion with
/// independently drawn parameters. Labels are preserved.
inline std::vector<ImageSample> augment_subject(
    const std::vector<ImageSample>& originals, const AugmentConfig& cfg) {
  if (originals.empty())
    throw ProtocolError("augment_subject: no original images");
  for (const auto& s : originals)
    if (s.subject != originals.front().subject)
      throw ProtocolError("augment_subject: mixed subjects in originals");
  if (cfg.target_per_subject < static_cast<int>(originals.size()))
    throw ConfigError("target_per_subject smaller than original count");

  std::vector<ImageSample> out = originals;
  out.reserve(static_cast<std::size_t>(cfg.target_per_subject));
  std::mt19937_64 rng(cfg.seed ^
                      (static_cast<std::uint64_t>(originals.front().subject) *
                       0x9e3779b97f4a7c15ull));
  std::uniform_real_distribution<double> angle(-cfg.rotation_deg,
                                               cfg.rotation_deg);
  std::uniform_real_distribution<double> zoom(cfg.zoom_min, cfg.zoom_max);
  int next_index = 0;
  for (const auto& s : originals) next_index = std::max(next_index, s.index + 1);
  std::size_t src = 0;
  while (static_cast<int>(out.size()) < cfg.target_per_subject) {
    const ImageSample& base = originals[src];
    src = (src + 1) % originals.size();
    ImageSample aug = base;
    aug.index = next_index++;
    aug.path.clear();
    const double a = cfg.rotation_deg > 0.0 ? angle(rng) : 0.0;
    const double z = cfg.zoom_max > cfg.zoom_min ? zoom(rng) : cfg.zoom_min;
    aug.image = random_rotation(base.image, a);
    aug.image = random_zoom(aug.image, z);
    aug.image = random_distortion(aug.image, cfg.distortion_px,
                                  cfg.smoothing_px, rng);
    out.push_back(std::move(aug));
  }
  return out;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_AUGMENT_HPP
