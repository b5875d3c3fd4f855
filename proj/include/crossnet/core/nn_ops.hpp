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
#include "crossnet/core/conv_kernels.hpp"

namespace crossnet {

template <class T>
VarT<T> conv2d(const VarT<T>& x, const VarT<T>& w, const VarT<T>& b, int stride,
               int pad) {
  TensorT<T> y = conv2d_forward(x.value(), w.value(),
                                b.defined() ? &b.value() : nullptr, stride, pad);
  const int kh = w.value().shape[2], kw = w.value().shape[3];
  const int in_h = x.value().shape[1], in_w = x.value().shape[2];
  std::vector<VarT<T>> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_op<T>(
      std::move(y), parents, [=](NodeT<T>& n) {
        auto& xp = *n.parents[0];
        auto& wp = *n.parents[1];
        if (xp.requires_grad)
          xp.accumulate(conv2d_backward_data(n.grad, wp.value, stride, pad, in_h, in_w));
        if (wp.requires_grad)
          wp.accumulate(conv2d_backward_weights(xp.value, n.grad, stride, pad, kh, kw));
        if (n.parents.size() > 2 && n.parents[2]->requires_grad)
          n.parents[2]->accumulate(conv2d_backward_bias(n.grad));
      });
}

/// Transposed convolution, weight layout (in_ch, out_ch, kh, kw).
template <class T>
VarT<T> conv_transpose2d(const VarT<T>& x, const VarT<T>& w, const VarT<T>& b,
                         int stride, int pad) {
  TensorT<T> y = conv_transpose2d_forward(
      x.value(), w.value(), b.defined() ? &b.value() : nullptr, stride, pad);
  std::vector<VarT<T>> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_op<T>(
      std::move(y), parents, [=](NodeT<T>& n) {
        auto& xp = *n.parents[0];
        auto& wp = *n.parents[1];
        if (xp.requires_grad)
          xp.accumulate(conv2d_forward(n.grad, wp.value, nullptr, stride, pad));
        if (wp.requires_grad)
          wp.accumulate(conv2d_backward_weights(n.grad, xp.value, stride, pad,
                                                wp.value.shape[2], wp.value.shape[3]));
        if (n.parents.size() > 2 && n.parents[2]->requires_grad)
          n.parents[2]->accumulate(conv2d_backward_bias(n.grad));
      });
}

template <class T>
VarT<T> relu(const VarT<T>& x) {
  TensorT<T> y = x.value();
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  return make_op<T>(std::move(y), {x}, [](NodeT<T>& n) {
    auto& xp = *n.parents[0];
    if (!xp.requires_grad) return;
    TensorT<T> g(n.grad.shape);
    for (std::int64_t i = 0; i < g.numel(); ++i)
      g.data[i] = xp.value.data[i] > T(0) ? n.grad.data[i] : T(0);
    xp.accumulate(g);
  });
}

template <class T>
VarT<T> concat_channels(const std::vector<VarT<T>>& xs) {
  check_arg(!xs.empty(), "concat: no inputs");
  const int h = xs[0].value().shape[1], w = xs[0].value().shape[2];
  int c_total = 0;
  for (const auto& x : xs) {
    check_arg(x.value().shape[1] == h && x.value().shape[2] == w,
              strfmt("concat: spatial mismatch %s vs %s",
                     shape_str(xs[0].value().shape).c_str(),
                     shape_str(x.value().shape).c_str()));
    c_total += x.value().shape[0];
  }
  TensorT<T> y(c_total, h, w);
  std::int64_t off = 0;
  for (const auto& x : xs) {
    std::copy(x.value().data.begin(), x.value().data.end(), y.data.begin() + off);
    off += x.value().numel();
  }
  return make_op<T>(std::move(y), xs, [](NodeT<T>& n) {
    std::int64_t off = 0;
    for (auto& p : n.parents) {
      const std::int64_t sz = p->value.numel();
      if (p->requires_grad) {
        TensorT<T> g(p->value.shape);
        std::copy(n.grad.data.begin() + off, n.grad.data.begin() + off + sz,
                  g.data.begin());
        p->accumulate(g);
      }
      off += sz;
    }
  });
}

/// Top-left spatial crop; the adjoint zero-pads back.
template <class T>
VarT<T> crop_spatial(const VarT<T>& x, int h, int w) {
  const auto& v = x.value();
  check_arg(h <= v.shape[1] && w <= v.shape[2], "crop: target larger than input");
  if (h == v.shape[1] && w == v.shape[2]) return x;
  TensorT<T> y(v.shape[0], h, w);
  for (int c = 0; c < v.shape[0]; ++c)
    for (int yy = 0; yy < h; ++yy)
      std::copy(&v.at(c, yy, 0), &v.at(c, yy, 0) + w, &y.at(c, yy, 0));
  return make_op<T>(std::move(y), {x}, [](NodeT<T>& n) {
    auto& xp = *n.parents[0];
    if (!xp.requires_grad) return;
    TensorT<T> g(xp.value.shape);
    const int h = n.grad.shape[1], w = n.grad.shape[2];
    for (int c = 0; c < g.shape[0]; ++c)
      for (int yy = 0; yy < h; ++yy)
        std::copy(&n.grad.at(c, yy, 0), &n.grad.at(c, yy, 0) + w, &g.at(c, yy, 0));
    xp.accumulate(g);
  });
}

// Bilinear 2x upsampling, half-pixel-centre convention: the output pixel at
// (y, x) samples the source at (y/2 - 0.25, x/2 - 0.25), index-clamped at the
// borders. This mapping composes exactly: two chained 2x passes sample where
// a single 4x pass would.
template <class T>
TensorT<T> upsample2x_bilinear_fwd(const TensorT<T>& in, T value_scale) {
  const int c = in.shape[0], h = in.shape[1], w = in.shape[2];
  TensorT<T> out(c, 2 * h, 2 * w);
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < 2 * h; ++y) {
      const T sy = T(0.5) * y - T(0.25);
      int y0 = static_cast<int>(std::floor(sy));
      const T fy = sy - y0;
      const int y0c = std::min(std::max(y0, 0), h - 1);
      const int y1c = std::min(std::max(y0 + 1, 0), h - 1);
      for (int x = 0; x < 2 * w; ++x) {
        const T sx = T(0.5) * x - T(0.25);
        int x0 = static_cast<int>(std::floor(sx));
        const T fx = sx - x0;
        const int x0c = std::min(std::max(x0, 0), w - 1);
        const int x1c = std::min(std::max(x0 + 1, 0), w - 1);
        out.at(ch, y, x) = value_scale *
            ((1 - fy) * ((1 - fx) * in.at(ch, y0c, x0c) + fx * in.at(ch, y0c, x1c)) +
             fy * ((1 - fx) * in.at(ch, y1c, x0c) + fx * in.at(ch, y1c, x1c)));
      }
    }
  }
  return out;
}

template <class T>
TensorT<T> upsample2x_bilinear_adjoint(const TensorT<T>& grad_out, int h, int w,
                                       T value_scale) {
  const int c = grad_out.shape[0];
  TensorT<T> din(c, h, w);
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < 2 * h; ++y) {
      const T sy = T(0.5) * y - T(0.25);
      int y0 = static_cast<int>(std::floor(sy));
      const T fy = sy - y0;
      const int y0c = std::min(std::max(y0, 0), h - 1);
      const int y1c = std::min(std::max(y0 + 1, 0), h - 1);
      for (int x = 0; x < 2 * w; ++x) {
        const T sx = T(0.5) * x - T(0.25);
        int x0 = static_cast<int>(std::floor(sx));
        const T fx = sx - x0;
        const int x0c = std::min(std::max(x0, 0), w - 1);
        const int x1c = std::min(std::max(x0 + 1, 0), w - 1);
        const T g = value_scale * grad_out.at(ch, y, x);
        din.at(ch, y0c, x0c) += (1 - fy) * (1 - fx) * g;
        din.at(ch, y0c, x1c) += (1 - fy) * fx * g;
        din.at(ch, y1c, x0c) += fy * (1 - fx) * g;
        din.at(ch, y1c, x1c) += fy * fx * g;
      }
    }
  }
  return din;
}

template <class T>
VarT<T> upsample2x_bilinear(const VarT<T>& x, T value_scale = T(1)) {
  const int h = x.value().shape[1], w = x.value().shape[2];
  return make_op<T>(upsample2x_bilinear_fwd(x.value(), value_scale), {x},
                    [=](NodeT<T>& n) {
                      auto& xp = *n.parents[0];
                      if (xp.requires_grad)
                        xp.accumulate(upsample2x_bilinear_adjoint(n.grad, h, w, value_scale));
                    });
}

template <class T>
VarT<T> add(const VarT<T>& a, const VarT<T>& b) {
  check_arg(a.value().same_shape(b.value()), "add: shape mismatch");
  TensorT<T> y = a.value();
  for (std::int64_t i = 0; i < y.numel(); ++i) y.data[i] += b.value().data[i];
  return make_op<T>(std::move(y), {a, b}, [](NodeT<T>& n) {
    for (auto& p : n.parents)
      if (p->requires_grad) p->accumulate(n.grad);
  });
}

template <class T>
VarT<T> mul_scalar(const VarT<T>& a, T s) {
  TensorT<T> y = a.value();
  for (auto& v : y.data) v *= s;
  return make_op<T>(std::move(y), {a}, [s](NodeT<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    TensorT<T> g = n.grad;
    for (auto& v : g.data) v *= s;
    p.accumulate(g);
  });
}

/// Sum of the Charbonnier penalty sqrt(d^2 + eps^2) over all elements of
/// (a - b); returns a 1-element tensor. Smooth everywhere, gradient at
/// d = 0 is exactly zero and |gradient| < 1 elementwise.
template <class T>
VarT<T> charbonnier_sum(const VarT<T>& a, const VarT<T>& b, T eps) {
  check_arg(a.value().same_shape(b.value()), "charbonnier: shape mismatch");
  const T e2 = eps * eps;
  double acc = 0;
  for (std::int64_t i = 0; i < a.value().numel(); ++i) {
    const double d = static_cast<double>(a.value().data[i]) - b.value().data[i];
    acc += std::sqrt(d * d + static_cast<double>(e2));
  }
  TensorT<T> y({1});
  y.data[0] = static_cast<T>(acc);
  return make_op<T>(std::move(y), {a, b}, [e2](NodeT<T>& n) {
    const T g0 = n.grad.data[0];
    auto& ap = *n.parents[0];
    auto& bp = *n.parents[1];
    TensorT<T> g(ap.value.shape);
    for (std::int64_t i = 0; i < g.numel(); ++i) {
      const T d = ap.value.data[i] - bp.value.data[i];
      g.data[i] = g0 * d / std::sqrt(d * d + e2);
    }
    if (ap.requires_grad) ap.accumulate(g);
    if (bp.requires_grad) {
      for (auto& v : g.data) v = -v;
      bp.accumulate(g);
    }
  });
}

/// Sum over all elements; 1-element output. Used by gradient probes.
template <class T>
VarT<T> sum_all(const VarT<T>& a) {
  double acc = 0;
  for (T v : a.value().data) acc += v;
  TensorT<T> y({1});
  y.data[0] = static_cast<T>(acc);
  return make_op<T>(std::move(y), {a}, [](NodeT<T>& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    p.accumulate(full_like(p.value, n.grad.data[0]));
  });
}

}  // namespace crossnet
