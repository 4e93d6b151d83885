// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_IMAGE_HPP
#define FINGERMATCH_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "fingermatch/errors.hpp"
#include "fingermatch/tensor.hpp"

namespace fingermatch {

/// Grayscale image, values in [0,1], row-major.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> pix;

  Image() = default;
  Image(int h, int w) : height(h), width(w), pix(static_cast<std::size_t>(h) * w, 0.f) {}

  float& at(int y, int x) { return pix[static_cast<std::size_t>(y) * width + x]; }
  float at(int y, int x) const { return pix[static_cast<std::size_t>(y) * width + x]; }
};

inline Image load_image(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw LoadError("cannot decode image: " + path);
  Image img(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x)
      img.at(y, x) = static_cast<float>(m.at<std::uint8_t>(y, x)) / 255.f;
  return img;
}

inline void save_image(const std::string& path, const Image& img) {
  cv::Mat m(img.height, img.width, CV_8UC1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float v = std::clamp(img.at(y, x), 0.f, 1.f);
      m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::lround(v * 255.f));
    }
  if (!cv::imwrite(path, m)) throw IoError("cannot write image: " + path);
}

/// Bilinear sample with edge replication; exact at integer coordinates.
inline float sample_bilinear(const Image& img, float sy, float sx) {
  sy = std::clamp(sy, 0.f, static_cast<float>(img.height - 1));
  sx = std::clamp(sx, 0.f, static_cast<float>(img.width - 1));
  const int y0 = static_cast<int>(sy);
  const int x0 = static_cast<int>(sx);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const float fy = sy - static_cast<float>(y0);
  const float fx = sx - static_cast<float>(x0);
  const float top = img.at(y0, x0) * (1.f - fx) + img.at(y0, x1) * fx;
  const float bot = img.at(y1, x0) * (1.f - fx) + img.at(y1, x1) * fx;
  return top * (1.f - fy) + bot * fy;
}

inline Image resize_bilinear(const Image& img, int out_h, int out_w) {
  if (out_h == img.height && out_w == img.width) return img;
  Image out(out_h, out_w);
  const float sy = static_cast<float>(img.height) / static_cast<float>(out_h);
  const float sx = static_cast<float>(img.width) / static_cast<float>(out_w);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      out.at(y, x) = sample_bilinear(img, (static_cast<float>(y) + 0.5f) * sy - 0.5f,
                                     (static_cast<float>(x) + 0.5f) * sx - 0.5f);
  return out;
}

/// Rotation about the image center, bilinear, edge-replicated fill.
/// angle_deg == 0 returns a pixel-identical copy.
inline Image rotate_image(const Image& img, double angle_deg) {
  if (angle_deg == 0.0) return img;
  const double rad = angle_deg * M_PI / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cy = (img.height - 1) / 2.0, cx = (img.width - 1) / 2.0;
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dy = y - cy, dx = x - cx;
      // inverse rotation of the output grid
      const double sy = cy + (c * dy - s * dx);
      const double sx = cx + (s * dy + c * dx);
      out.at(y, x) = sample_bilinear(img, static_cast<float>(sy),
                                     static_cast<float>(sx));
    }
  }
  return out;
}

/// Zoom about the image center; scale > 1 magnifies. scale == 1 is identity.
inline Image zoom_image(const Image& img, double scale) {
  if (scale == 1.0) return img;
  if (!(scale > 0.0)) throw ConfigError("zoom scale must be positive");
  const double cy = (img.height - 1) / 2.0, cx = (img.width - 1) / 2.0;
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(y, x) = sample_bilinear(
          img, static_cast<float>(cy + (y - cy) / scale),
          static_cast<float>(cx + (x - cx) / scale));
  return out;
}

/// Separable Gaussian blur used to smooth displacement fields.
inline std::vector<float> gaussian_blur_field(const std::vector<float>& field,
                                              int h, int w, double sigma) {
  if (sigma <= 0.0) return field;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = static_cast<float>(v);
    sum += v;
  }
  for (float& k : kernel) k = static_cast<float>(k / sum);
  std::vector<float> tmp(field.size()), out(field.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = std::clamp(x + i, 0, w - 1);
        acc += field[static_cast<std::size_t>(y) * w + xx] *
               kernel[static_cast<std::size_t>(i + radius)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = std::clamp(y + i, 0, h - 1);
        acc += tmp[static_cast<std::size_t>(yy) * w + x] *
               kernel[static_cast<std::size_t>(i + radius)];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return out;
}

/// Warp by a per-pixel displacement field (output(y,x) samples the input at
/// (y + dy, x + dx)). Zero fields are the identity.
inline Image distort_image(const Image& img, const std::vector<float>& dy,
                           const std::vector<float>& dx) {
  if (dy.size() != img.pix.size() || dx.size() != img.pix.size())
    throw DimensionError("displacement field size mismatch");
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      if (dy[i] == 0.f && dx[i] == 0.f) {
        out.at(y, x) = img.at(y, x);
      } else {
        out.at(y, x) = sample_bilinear(img, static_cast<float>(y) + dy[i],
                                       static_cast<float>(x) + dx[i]);
      }
    }
  return out;
}

inline void clamp_01(Image& img) {
  for (float& v : img.pix) v = std::clamp(v, 0.f, 1.f);
}

/// Network input tensor {1,H,W} from an image, resizing when needed.
inline Tensor<float> image_to_tensor(const Image& img, int target_h,
                                     int target_w) {
  if (img.height == target_h && img.width == target_w) {
    Tensor<float> t({1, target_h, target_w});
    std::copy(img.pix.begin(), img.pix.end(), t.data.begin());
    return t;
  }
  Image resized = resize_bilinear(img, target_h, target_w);
  Tensor<float> t({1, target_h, target_w});
  std::copy(resized.pix.begin(), resized.pix.end(), t.data.begin());
  return t;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_IMAGE_HPP
