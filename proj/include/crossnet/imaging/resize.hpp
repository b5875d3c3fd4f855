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

#include <cmath>
#include <vector>

#include "crossnet/core/tensor.hpp"

namespace crossnet {

/// Keys' cubic kernel with a = -0.5.
template <class T>
T cubic_kernel(T x) {
  x = std::abs(x);
  if (x <= T(1)) return (T(1.5) * x - T(2.5)) * x * x + T(1);
  if (x < T(2)) return ((T(-0.5) * x + T(2.5)) * x - T(4)) * x + T(2);
  return T(0);
}

namespace detail {

struct ResampleTap {
  int first;                    // first source index (clamped later)
  std::vector<double> weights;  // normalized
};

// MATLAB-style resampling plan: when shrinking, the kernel is widened by the
// inverse scale so it low-passes before decimation.
inline std::vector<ResampleTap> resample_plan(int in_size, int out_size, double factor) {
  const double kscale = std::min(factor, 1.0);
  const double radius = 2.0 / kscale;
  std::vector<ResampleTap> taps(out_size);
  for (int o = 0; o < out_size; ++o) {
    const double u = (o + 0.5) / factor - 0.5;
    const int first = static_cast<int>(std::ceil(u - radius));
    const int last = static_cast<int>(std::floor(u + radius));
    ResampleTap t;
    t.first = first;
    t.weights.resize(last - first + 1);
    double sum = 0;
    for (int i = first; i <= last; ++i) {
      const double w = cubic_kernel((u - i) * kscale);
      t.weights[i - first] = w;
      sum += w;
    }
    for (double& w : t.weights) w /= sum;
    taps[o] = std::move(t);
  }
  return taps;
}

}  // namespace detail

/// Bicubic resampling by a positive factor; antialiased when shrinking.
/// Output dimensions are round(dim * factor) and must be >= 1.
template <class T>
TensorT<T> resize_bicubic(const TensorT<T>& src, double factor) {
  check_arg(factor > 0, "resize_bicubic: factor must be positive");
  const int c = src.shape[0], h = src.shape[1], w = src.shape[2];
  const int oh = static_cast<int>(std::llround(h * factor));
  const int ow = static_cast<int>(std::llround(w * factor));
  check_arg(oh >= 1 && ow >= 1, "resize_bicubic: output dimensions round to zero");

  const auto xplan = detail::resample_plan(w, ow, factor);
  const auto yplan = detail::resample_plan(h, oh, factor);

  // Horizontal pass, then vertical.
  TensorT<T> mid(c, h, ow);
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < ow; ++x) {
        const auto& t = xplan[x];
        double acc = 0;
        for (size_t k = 0; k < t.weights.size(); ++k) {
          const int xi = std::min(std::max(t.first + static_cast<int>(k), 0), w - 1);
          acc += t.weights[k] * src.at(ch, y, xi);
        }
        mid.at(ch, y, x) = static_cast<T>(acc);
      }

  TensorT<T> out(c, oh, ow);
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < oh; ++y) {
      const auto& t = yplan[y];
      for (int x = 0; x < ow; ++x) {
        double acc = 0;
        for (size_t k = 0; k < t.weights.size(); ++k) {
          const int yi = std::min(std::max(t.first + static_cast<int>(k), 0), h - 1);
          acc += t.weights[k] * mid.at(ch, yi, x);
        }
        out.at(ch, y, x) = static_cast<T>(acc);
      }
    }
  return out;
}

struct CropRecord {
  int orig_height = 0;
  int orig_width = 0;
  bool padded() const { return orig_height != 0 || orig_width != 0; }
};

/// Reflection-pads right/bottom so both dimensions become multiples of
/// `multiple`. The record restores the original raster exactly.
template <class T>
std::pair<TensorT<T>, CropRecord> pad_to_multiple(const TensorT<T>& src, int multiple = 32) {
  const int c = src.shape[0], h = src.shape[1], w = src.shape[2];
  const int ph = (h + multiple - 1) / multiple * multiple;
  const int pw = (w + multiple - 1) / multiple * multiple;
  if (ph == h && pw == w) return {src, CropRecord{}};

  auto reflect = [](int i, int n) {
    // mirror about the last pixel, without repeating it (n-2, n-1, n-2, ...)
    if (i < n) return i;
    int r = 2 * n - 2 - i;
    return std::max(r, 0);
  };
  TensorT<T> out(c, ph, pw);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < ph; ++y) {
      const int ys = reflect(y, h);
      for (int x = 0; x < pw; ++x) out.at(ch, y, x) = src.at(ch, ys, reflect(x, w));
    }
  return {out, CropRecord{h, w}};
}

template <class T>
TensorT<T> undo_pad(const TensorT<T>& padded, const CropRecord& rec) {
  if (!rec.padded()) return padded;
  TensorT<T> out(padded.shape[0], rec.orig_height, rec.orig_width);
  for (int ch = 0; ch < out.shape[0]; ++ch)
    for (int y = 0; y < rec.orig_height; ++y)
      std::copy(&padded.at(ch, y, 0), &padded.at(ch, y, 0) + rec.orig_width,
                &out.at(ch, y, 0));
  return out;
}

}  // namespace crossnet
