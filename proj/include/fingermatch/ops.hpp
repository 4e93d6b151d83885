// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_OPS_HPP
#define FINGERMATCH_OPS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fingermatch/errors.hpp"
#include "fingermatch/tensor.hpp"

namespace fingermatch {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// --- convolution, stride 1, "same" zero padding --------------------------

// cols: (Cin*kh*kw) x (H*W), row index (cin*kh + kr)*kw + kc.
template <typename T>
void im2col_same(const Tensor<T>& x, int kh, int kw, MatRM<T>& cols) {
  const int c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int pad_t = (kh - 1) / 2, pad_l = (kw - 1) / 2;
  cols.setZero(c_in * kh * kw, h * w);
  for (int ci = 0; ci < c_in; ++ci) {
    for (int kr = 0; kr < kh; ++kr) {
      for (int kc = 0; kc < kw; ++kc) {
        const int row = (ci * kh + kr) * kw + kc;
        T* dst = cols.data() + static_cast<std::size_t>(row) * h * w;
        for (int oy = 0; oy < h; ++oy) {
          const int iy = oy + kr - pad_t;
          if (iy < 0 || iy >= h) continue;
          const int ox_lo = std::max(0, pad_l - kc);
          const int ox_hi = std::min(w, w + pad_l - kc);
          const T* src = x.ptr() + (static_cast<std::size_t>(ci) * h + iy) * w +
                         (ox_lo + kc - pad_l);
          std::copy(src, src + (ox_hi - ox_lo), dst + oy * w + ox_lo);
        }
      }
    }
  }
}

// Scatter-add of a cols-shaped gradient back onto the input map.
template <typename T>
void col2im_same(const MatRM<T>& dcols, int kh, int kw, Tensor<T>& dx) {
  const int c_in = dx.dim(0), h = dx.dim(1), w = dx.dim(2);
  const int pad_t = (kh - 1) / 2, pad_l = (kw - 1) / 2;
  for (int ci = 0; ci < c_in; ++ci) {
    for (int kr = 0; kr < kh; ++kr) {
      for (int kc = 0; kc < kw; ++kc) {
        const int row = (ci * kh + kr) * kw + kc;
        const T* src = dcols.data() + static_cast<std::size_t>(row) * h * w;
        for (int oy = 0; oy < h; ++oy) {
          const int iy = oy + kr - pad_t;
          if (iy < 0 || iy >= h) continue;
          const int ox_lo = std::max(0, pad_l - kc);
          const int ox_hi = std::min(w, w + pad_l - kc);
          T* dst = &dx.at(ci, iy, ox_lo + kc - pad_l);
          const T* s = src + oy * w + ox_lo;
          for (int i = 0; i < ox_hi - ox_lo; ++i) dst[i] += s[i];
        }
      }
    }
  }
}

// weight {Cout, Cin, kh, kw}, bias {Cout}; output {Cout, H, W}.
template <typename T>
Tensor<T> conv2d_same(const Tensor<T>& x, const Tensor<T>& weight,
                      const Tensor<T>& bias) {
  const int c_out = weight.dim(0), c_in = weight.dim(1);
  const int kh = weight.dim(2), kw = weight.dim(3);
  if (x.dim(0) != c_in)
    throw DimensionError("conv input channels " + x.shape_str() +
                         " do not match weight " + weight.shape_str());
  const int h = x.dim(1), w = x.dim(2);
  if (kh > h || kw > w)
    throw DimensionError("kernel " + weight.shape_str() +
                         " larger than input map " + x.shape_str());
  MatRM<T> cols;
  im2col_same(x, kh, kw, cols);
  Eigen::Map<const MatRM<T>> wm(weight.ptr(), c_out, c_in * kh * kw);
  Tensor<T> out({c_out, h, w});
  Eigen::Map<MatRM<T>> om(out.ptr(), c_out, h * w);
  om.noalias() = wm * cols;
  for (int co = 0; co < c_out; ++co)
    om.row(co).array() += bias.data[static_cast<std::size_t>(co)];
  return out;
}

// Accumulates dweight/dbias; writes dx if non-null.
template <typename T>
void conv2d_same_backward(const Tensor<T>& x, const Tensor<T>& weight,
                          const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>& dweight,
                          Tensor<T>& dbias) {
  const int c_out = weight.dim(0), c_in = weight.dim(1);
  const int kh = weight.dim(2), kw = weight.dim(3);
  const int h = x.dim(1), w = x.dim(2);
  MatRM<T> cols;
  im2col_same(x, kh, kw, cols);
  Eigen::Map<const MatRM<T>> dym(dy.ptr(), c_out, h * w);
  Eigen::Map<MatRM<T>> dwm(dweight.ptr(), c_out, c_in * kh * kw);
  dwm.noalias() += dym * cols.transpose();
  for (int co = 0; co < c_out; ++co)
    dbias.data[static_cast<std::size_t>(co)] += dym.row(co).sum();
  if (dx != nullptr) {
    Eigen::Map<const MatRM<T>> wm(weight.ptr(), c_out, c_in * kh * kw);
    MatRM<T> dcols = wm.transpose() * dym;
    dx->fill(T(0));
    col2im_same(dcols, kh, kw, *dx);
  }
}

// --- rectification --------------------------------------------------------

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (T& v : x.data) v = v > T(0) ? v : T(0);
}

// Mask taken from the post-activation values (y > 0).
template <typename T>
void relu_backward_inplace(const Tensor<T>& y, Tensor<T>& dy) {
  for (std::size_t i = 0; i < y.data.size(); ++i)
    if (!(y.data[i] > T(0))) dy.data[i] = T(0);
}

// --- max pooling (floor semantics: trailing remainder rows/cols dropped) --

template <typename T>
Tensor<T> maxpool(const Tensor<T>& x, int ph, int pw,
                  std::vector<int>* argmax = nullptr) {
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (ph > h || pw > w)
    throw DimensionError("pool window (" + std::to_string(ph) + "," +
                         std::to_string(pw) + ") larger than map " +
                         x.shape_str());
  const int oh = h / ph, ow = w / pw;
  Tensor<T> out({c, oh, ow});
  if (argmax) argmax->assign(out.size(), 0);
  std::size_t o = 0;
  for (int ci = 0; ci < c; ++ci) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++o) {
        T best = x.at(ci, oy * ph, ox * pw);
        int best_idx = (ci * h + oy * ph) * w + ox * pw;
        for (int r = 0; r < ph; ++r) {
          for (int cc = 0; cc < pw; ++cc) {
            T v = x.at(ci, oy * ph + r, ox * pw + cc);
            if (v > best) {
              best = v;
              best_idx = (ci * h + oy * ph + r) * w + ox * pw + cc;
            }
          }
        }
        out.data[o] = best;
        if (argmax) (*argmax)[o] = best_idx;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& dy, const std::vector<int>& argmax,
                           const std::vector<int>& input_shape) {
  Tensor<T> dx(input_shape);
  for (std::size_t i = 0; i < dy.data.size(); ++i)
    dx.data[static_cast<std::size_t>(argmax[i])] += dy.data[i];
  return dx;
}

// --- dense layer -----------------------------------------------------------

// weight {out, in}, bias {out}; x flat.
template <typename T>
std::vector<T> dense(const std::vector<T>& x, const Tensor<T>& weight,
                     const Tensor<T>& bias) {
  const int out = weight.dim(0), in = weight.dim(1);
  if (static_cast<int>(x.size()) != in)
    throw DimensionError("dense input size " + std::to_string(x.size()) +
                         " != " + std::to_string(in));
  Eigen::Map<const MatRM<T>> wm(weight.ptr(), out, in);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> xv(x.data(), in);
  std::vector<T> y(static_cast<std::size_t>(out));
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> yv(y.data(), out);
  yv.noalias() = wm * xv;
  for (int i = 0; i < out; ++i) y[static_cast<std::size_t>(i)] += bias.data[i];
  return y;
}

template <typename T>
std::vector<T> dense_backward(const std::vector<T>& x, const Tensor<T>& weight,
                              const std::vector<T>& dy, Tensor<T>& dweight,
                              Tensor<T>& dbias) {
  const int out = weight.dim(0), in = weight.dim(1);
  Eigen::Map<const MatRM<T>> wm(weight.ptr(), out, in);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> xv(x.data(), in);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> dyv(dy.data(), out);
  Eigen::Map<MatRM<T>> dwm(dweight.ptr(), out, in);
  dwm.noalias() += dyv * xv.transpose();
  for (int i = 0; i < out; ++i) dbias.data[i] += dy[static_cast<std::size_t>(i)];
  std::vector<T> dx(static_cast<std::size_t>(in));
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dxv(dx.data(), in);
  dxv.noalias() = wm.transpose() * dyv;
  return dx;
}

// --- unit-norm projection ----------------------------------------------------

template <typename T>
T l2_norm(const std::vector<T>& v) {
  T s = T(0);
  for (T x : v) s += x * x;
  return std::sqrt(s);
}

template <typename T>
std::vector<T> l2_normalize(const std::vector<T>& v) {
  T n = l2_norm(v);
  if (!(n > T(0)))
    throw DegenerateInputError("cannot normalize a zero-norm vector");
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

// e = z/||z||; dz = (de - e (e.de)) / ||z||
template <typename T>
std::vector<T> l2_normalize_backward(const std::vector<T>& e, T norm,
                                     const std::vector<T>& de) {
  T dot = T(0);
  for (std::size_t i = 0; i < e.size(); ++i) dot += e[i] * de[i];
  std::vector<T> dz(e.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    dz[i] = (de[i] - e[i] * dot) / norm;
  return dz;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_OPS_HPP
