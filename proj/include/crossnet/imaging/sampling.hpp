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

#include "crossnet/core/autodiff.hpp"

// Bilinear sampling and backward warping.
//
// Conventions, fixed across the project:
//   - coordinate origin at the centre of the top-left pixel; x grows right,
//     y grows down;
//   - flow fields store (horizontal, vertical) displacement in channels
//     (0, 1), in pixels of their own grid;
//   - warp is a backward warp: output(y, x) reads the source at
//     (x + flow_h(y,x), y + flow_v(y,x));
//   - positions outside the source are clamped to the border before
//     interpolation, so disocclusions degrade to edge content instead of
//     black fill.

namespace crossnet {

namespace detail {

template <class T>
struct BilinearTaps {
  int x0, x1, y0, y1;
  T fx, fy;
  bool x_interior, y_interior;  // false where the position clamped
};

template <class T>
inline BilinearTaps<T> bilinear_taps(T x, T y, int w, int h) {
  BilinearTaps<T> t;
  t.x_interior = x > T(0) && x < T(w - 1);
  t.y_interior = y > T(0) && y < T(h - 1);
  const T xc = std::min(std::max(x, T(0)), T(w - 1));
  const T yc = std::min(std::max(y, T(0)), T(h - 1));
  const T xf = std::floor(xc), yf = std::floor(yc);
  t.fx = xc - xf;
  t.fy = yc - yf;
  t.x0 = static_cast<int>(xf);
  t.y0 = static_cast<int>(yf);
  t.x1 = std::min(t.x0 + 1, w - 1);
  t.y1 = std::min(t.y0 + 1, h - 1);
  return t;
}

}  // namespace detail

/// Samples every channel of `src` at the absolute positions given by
/// `coords` (channel 0 = x, channel 1 = y). Output spatial shape follows
/// `coords`. Non-finite coordinates are rejected.
template <class T>
TensorT<T> bilinear_sample_fwd(const TensorT<T>& src, const TensorT<T>& coords) {
  check_arg(src.ndim() == 3 && !src.empty(), "bilinear_sample: empty source");
  check_arg(coords.ndim() == 3 && coords.shape[0] == 2,
            "bilinear_sample: coords must be (2,H,W)");
  check_arg(coords.all_finite(), "bilinear_sample: non-finite coordinates");
  const int c = src.shape[0], sh = src.shape[1], sw = src.shape[2];
  const int h = coords.shape[1], w = coords.shape[2];
  TensorT<T> out(c, h, w);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
      const auto t = detail::bilinear_taps(coords.data[i], coords.data[plane + i], sw, sh);
      for (int ch = 0; ch < c; ++ch) {
        const T v00 = src.at(ch, t.y0, t.x0), v01 = src.at(ch, t.y0, t.x1);
        const T v10 = src.at(ch, t.y1, t.x0), v11 = src.at(ch, t.y1, t.x1);
        out.at(ch, y, x) = (1 - t.fy) * ((1 - t.fx) * v00 + t.fx * v01) +
                           t.fy * ((1 - t.fx) * v10 + t.fx * v11);
      }
    }
  }
  return out;
}

template <class T>
struct SampleGrads {
  TensorT<T> dsrc;
  TensorT<T> dcoords;
};

template <class T>
SampleGrads<T> bilinear_sample_bwd(const TensorT<T>& src, const TensorT<T>& coords,
                                   const TensorT<T>& grad_out, bool need_dsrc,
                                   bool need_dcoords) {
  const int c = src.shape[0], sh = src.shape[1], sw = src.shape[2];
  const int h = coords.shape[1], w = coords.shape[2];
  SampleGrads<T> g;
  if (need_dsrc) g.dsrc = TensorT<T>(src.shape);
  if (need_dcoords) g.dcoords = TensorT<T>(coords.shape);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;

  if (need_dcoords) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
        const auto t = detail::bilinear_taps(coords.data[i], coords.data[plane + i], sw, sh);
        T gx = 0, gy = 0;
        for (int ch = 0; ch < c; ++ch) {
          const T v00 = src.at(ch, t.y0, t.x0), v01 = src.at(ch, t.y0, t.x1);
          const T v10 = src.at(ch, t.y1, t.x0), v11 = src.at(ch, t.y1, t.x1);
          const T go = grad_out.at(ch, y, x);
          gx += go * ((1 - t.fy) * (v01 - v00) + t.fy * (v11 - v10));
          gy += go * ((1 - t.fx) * (v10 - v00) + t.fx * (v11 - v01));
        }
        // The clamp is constant beyond the border, so its derivative is 0.
        g.dcoords.data[i] = t.x_interior ? gx : T(0);
        g.dcoords.data[plane + i] = t.y_interior ? gy : T(0);
      }
    }
  }
  if (need_dsrc) {
    // Scatter into the source; parallel over channels keeps writes disjoint.
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < c; ++ch) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
          const auto t =
              detail::bilinear_taps(coords.data[i], coords.data[plane + i], sw, sh);
          const T go = grad_out.at(ch, y, x);
          g.dsrc.at(ch, t.y0, t.x0) += go * (1 - t.fy) * (1 - t.fx);
          g.dsrc.at(ch, t.y0, t.x1) += go * (1 - t.fy) * t.fx;
          g.dsrc.at(ch, t.y1, t.x0) += go * t.fy * (1 - t.fx);
          g.dsrc.at(ch, t.y1, t.x1) += go * t.fy * t.fx;
        }
      }
    }
  }
  return g;
}

/// Backward warp of `src` by `flow` (same spatial resolution, 2 channels).
template <class T>
TensorT<T> warp_fwd(const TensorT<T>& src, const TensorT<T>& flow) {
  check_arg(flow.ndim() == 3 && flow.shape[0] == 2, "warp: flow must be (2,H,W)");
  check_arg(src.shape[1] == flow.shape[1] && src.shape[2] == flow.shape[2],
            strfmt("warp: resolution mismatch, src %s vs flow %s",
                   shape_str(src.shape).c_str(), shape_str(flow.shape).c_str()));
  TensorT<T> coords = flow;
  const int h = flow.shape[1], w = flow.shape[2];
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
      coords.data[i] += T(x);
      coords.data[plane + i] += T(y);
    }
  return bilinear_sample_fwd(src, coords);
}

/// bilinear_sample as a graph op; differentiable in both arguments.
template <class T>
VarT<T> bilinear_sample(const VarT<T>& src, const VarT<T>& coords) {
  TensorT<T> y = bilinear_sample_fwd(src.value(), coords.value());
  return make_op<T>(std::move(y), {src, coords}, [](NodeT<T>& n) {
    auto& sp = *n.parents[0];
    auto& cp = *n.parents[1];
    auto g = bilinear_sample_bwd(sp.value, cp.value, n.grad, sp.requires_grad,
                                 cp.requires_grad);
    if (sp.requires_grad) sp.accumulate(g.dsrc);
    if (cp.requires_grad) cp.accumulate(g.dcoords);
  });
}

/// warp as a graph op. The identity-grid offset has unit Jacobian, so the
/// flow gradient equals the coordinate gradient.
template <class T>
VarT<T> warp(const VarT<T>& src, const VarT<T>& flow) {
  TensorT<T> y = warp_fwd(src.value(), flow.value());
  return make_op<T>(std::move(y), {src, flow}, [](NodeT<T>& n) {
    auto& sp = *n.parents[0];
    auto& fp = *n.parents[1];
    TensorT<T> coords = fp.value;
    const int h = coords.shape[1], w = coords.shape[2];
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
        coords.data[i] += T(x);
        coords.data[plane + i] += T(y);
      }
    auto g = bilinear_sample_bwd(sp.value, coords, n.grad, sp.requires_grad,
                                 fp.requires_grad);
    if (sp.requires_grad) sp.accumulate(g.dsrc);
    if (fp.requires_grad) fp.accumulate(g.dcoords);
  });
}

}  // namespace crossnet
