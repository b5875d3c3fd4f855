/* Copyright (c) 2026 CrossNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <Eigen/Core>
#include <cstring>
#include <type_traits>
#include <vector>

#include "crossnet/core/tensor.hpp"

// 2-D convolution kernels (zero padding, square stride) implemented as
// row-wise im2col feeding Eigen GEMMs. Work is partitioned over output rows
// with a static schedule and each row is written by exactly one thread, so
// results are bitwise reproducible. The weight gradient accumulates row
// blocks serially for the same reason.

namespace crossnet {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapRM = Eigen::Map<RowMat<T>>;
template <class T>
using MapCRM = Eigen::Map<const RowMat<T>>;
template <class T>
using MapStridedRM = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Fills one output row's im2col block: K is (ci*kh*kw) x wo, row-major.
template <class T>
void im2col_row(const TensorT<T>& in, int yo, int kh, int kw, int stride,
                int pad, int wo, T* K) {
  const int ci = in.shape[0], h = in.shape[1], w = in.shape[2];
  const T* src = in.data.data();
  for (int c = 0; c < ci; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      const int yi = yo * stride + ky - pad;
      T* krow_base = K + (static_cast<std::int64_t>(c) * kh + ky) * kw * wo;
      if (yi < 0 || yi >= h) {
        std::memset(krow_base, 0, sizeof(T) * kw * wo);
        continue;
      }
      const T* srow = src + (static_cast<std::int64_t>(c) * h + yi) * w;
      for (int kx = 0; kx < kw; ++kx) {
        T* krow = krow_base + static_cast<std::int64_t>(kx) * wo;
        if (stride == 1) {
          // xi = xo + kx - pad; copy the valid span, zero the rest.
          const int off = kx - pad;
          const int lo = std::max(0, -off);
          const int hi = std::min(wo, w - off);
          for (int x = 0; x < lo; ++x) krow[x] = T(0);
          if (hi > lo) std::memcpy(krow + lo, srow + lo + off, sizeof(T) * (hi - lo));
          for (int x = std::max(hi, lo); x < wo; ++x) krow[x] = T(0);
        } else {
          for (int xo = 0; xo < wo; ++xo) {
            const int xi = xo * stride + kx - pad;
            krow[xo] = (xi >= 0 && xi < w) ? srow[xi] : T(0);
          }
        }
      }
    }
  }
}

/// out(co,yo,xo) = bias(co) + sum_{ci,ky,kx} w(co,ci,ky,kx) * in(ci, yo*s+ky-p, xo*s+kx-p)
template <class T>
TensorT<T> conv2d_forward(const TensorT<T>& in, const TensorT<T>& w,
                          const TensorT<std::type_identity_t<T>>* bias, int stride,
                          int pad) {
  check_arg(in.ndim() == 3 && w.ndim() == 4, "conv2d: bad ranks");
  check_arg(w.shape[1] == in.shape[0],
            strfmt("conv2d: input has %d channels, weight expects %d",
                   in.shape[0], w.shape[1]));
  const int co = w.shape[0], ci = w.shape[1], kh = w.shape[2], kw = w.shape[3];
  const int ho = conv_out_dim(in.shape[1], kh, stride, pad);
  const int wo = conv_out_dim(in.shape[2], kw, stride, pad);
  check_arg(ho >= 1 && wo >= 1, "conv2d: output would be empty");
  if (bias) check_arg(bias->numel() == co, "conv2d: bias size mismatch");

  TensorT<T> out(co, ho, wo);
  const std::int64_t r = static_cast<std::int64_t>(ci) * kh * kw;
  MapCRM<T> wm(w.data.data(), co, r);

#pragma omp parallel
  {
    std::vector<T> scratch(r * wo);
#pragma omp for schedule(static)
    for (int yo = 0; yo < ho; ++yo) {
      im2col_row(in, yo, kh, kw, stride, pad, wo, scratch.data());
      MapCRM<T> km(scratch.data(), r, wo);
      MapStridedRM<T> om(out.data.data() + static_cast<std::int64_t>(yo) * wo,
                         co, wo, Eigen::OuterStride<>(static_cast<std::int64_t>(ho) * wo));
      om.noalias() = wm * km;
      if (bias)
        for (int c = 0; c < co; ++c) om.row(c).array() += bias->data[c];
    }
  }
  return out;
}

/// Gradient of conv2d_forward w.r.t. its input: transposed convolution of
/// grad_out. Realized as a stride-1 convolution of the zero-stuffed gradient
/// with the spatially flipped, channel-swapped weight.
template <class T>
TensorT<T> conv2d_backward_data(const TensorT<T>& grad_out, const TensorT<T>& w,
                                int stride, int pad, int in_h, int in_w) {
  const int co = w.shape[0], ci = w.shape[1], kh = w.shape[2], kw = w.shape[3];
  check_arg(grad_out.shape[0] == co, "conv2d_backward_data: channel mismatch");
  const int ho = grad_out.shape[1], wo = grad_out.shape[2];

  TensorT<T> wflip({ci, co, kh, kw});
  for (int a = 0; a < co; ++a)
    for (int b = 0; b < ci; ++b)
      for (int ky = 0; ky < kh; ++ky)
        for (int kx = 0; kx < kw; ++kx)
          wflip.data[((static_cast<std::int64_t>(b) * co + a) * kh + (kh - 1 - ky)) * kw +
                     (kw - 1 - kx)] =
              w.data[((static_cast<std::int64_t>(a) * ci + b) * kh + ky) * kw + kx];

  // Trailing input rows/cols that the last window only partially reached need
  // the stuffed tensor extended with zeros, so the full correlation below
  // emits exactly in_h x in_w.
  const int rest_h = in_h + 2 * pad - kh - stride * (ho - 1);
  const int rest_w = in_w + 2 * pad - kw - stride * (wo - 1);
  check_arg(rest_h >= 0 && rest_w >= 0, "conv2d_backward_data: inconsistent geometry");

  const TensorT<T>* g = &grad_out;
  TensorT<T> stuffed;
  if (stride > 1 || rest_h > 0 || rest_w > 0) {
    stuffed = TensorT<T>(co, stride * (ho - 1) + 1 + rest_h, stride * (wo - 1) + 1 + rest_w);
    for (int c = 0; c < co; ++c)
      for (int y = 0; y < ho; ++y)
        for (int x = 0; x < wo; ++x)
          stuffed.at(c, y * stride, x * stride) = grad_out.at(c, y, x);
    g = &stuffed;
  }

  TensorT<T> din = conv2d_forward(*g, wflip, nullptr, 1, kh - 1 - pad);
  check_arg(din.shape[1] == in_h && din.shape[2] == in_w,
            "conv2d_backward_data: size reconstruction failed");
  return din;
}

/// Gradient of conv2d_forward w.r.t. the weight.
template <class T>
TensorT<T> conv2d_backward_weights(const TensorT<T>& in, const TensorT<T>& grad_out,
                                   int stride, int pad, int kh, int kw) {
  const int ci = in.shape[0], co = grad_out.shape[0];
  const int ho = grad_out.shape[1], wo = grad_out.shape[2];
  const std::int64_t r = static_cast<std::int64_t>(ci) * kh * kw;

  TensorT<T> dw({co, ci, kh, kw});
  MapRM<T> dwm(dw.data.data(), co, r);

  constexpr int kRowBlock = 16;
  std::vector<T> scratch(r * wo * kRowBlock);
  for (int y0 = 0; y0 < ho; y0 += kRowBlock) {
    const int rows = std::min(kRowBlock, ho - y0);
#pragma omp parallel for schedule(static)
    for (int dy = 0; dy < rows; ++dy)
      im2col_row(in, y0 + dy, kh, kw, stride, pad, wo,
                 scratch.data() + static_cast<std::int64_t>(dy) * r * wo);
    // Columns of the block-level gradient matrix, gathered row-major per yo:
    // gout block is (co x rows*wo) with a stride of ho*wo between channels.
    for (int dy = 0; dy < rows; ++dy) {
      MapCRM<T> km(scratch.data() + static_cast<std::int64_t>(dy) * r * wo, r, wo);
      Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>> gm(
          grad_out.data.data() + static_cast<std::int64_t>(y0 + dy) * wo, co, wo,
          Eigen::OuterStride<>(static_cast<std::int64_t>(ho) * wo));
      dwm.noalias() += gm * km.transpose();
    }
  }
  return dw;
}

template <class T>
TensorT<T> conv2d_backward_bias(const TensorT<T>& grad_out) {
  const int co = grad_out.shape[0];
  TensorT<T> db({co});
  const std::int64_t plane = static_cast<std::int64_t>(grad_out.shape[1]) * grad_out.shape[2];
#pragma omp parallel for schedule(static)
  for (int c = 0; c < co; ++c) {
    T s = 0;
    const T* p = grad_out.data.data() + c * plane;
    for (std::int64_t i = 0; i < plane; ++i) s += p[i];
    db.data[c] = s;
  }
  return db;
}

/// Transposed convolution; weight layout (in_ch, out_ch, kh, kw).
/// out_dim = stride*(in_dim-1) + k - 2*pad.
template <class T>
TensorT<T> conv_transpose2d_forward(const TensorT<T>& in, const TensorT<T>& w,
                                    const TensorT<std::type_identity_t<T>>* bias,
                                    int stride, int pad) {
  check_arg(w.ndim() == 4 && w.shape[0] == in.shape[0],
            strfmt("conv_transpose2d: input has %d channels, weight expects %d",
                   in.shape[0], w.ndim() == 4 ? w.shape[0] : -1));
  const int out_ch = w.shape[1], kh = w.shape[2], kw = w.shape[3];
  const int oh = stride * (in.shape[1] - 1) + kh - 2 * pad;
  const int ow = stride * (in.shape[2] - 1) + kw - 2 * pad;
  TensorT<T> out = conv2d_backward_data(in, w, stride, pad, oh, ow);
  (void)out_ch;
  if (bias) {
    check_arg(bias->numel() == out.shape[0], "conv_transpose2d: bias size mismatch");
    const std::int64_t plane = static_cast<std::int64_t>(oh) * ow;
    for (int c = 0; c < out.shape[0]; ++c) {
      T* p = out.data.data() + c * plane;
      for (std::int64_t i = 0; i < plane; ++i) p[i] += bias->data[c];
    }
  }
  return out;
}

}  // namespace crossnet
