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

#include <functional>
#include <vector>

#include "crossnet/core/autodiff.hpp"
#include "crossnet/core/rng.hpp"
#include "crossnet/core/tensor.hpp"

namespace crossnet::test {

template <class T>
TensorT<T> random_tensor(std::vector<int> shape, Rng& rng, T lo = T(0), T hi = T(1)) {
  TensorT<T> t(std::move(shape));
  for (auto& v : t.data) v = static_cast<T>(lo + (hi - lo) * rng.uniform());
  return t;
}

/// Smooth random raster: low-frequency sinusoid mix, values in (0.1, 0.9).
/// Bilinear-interpolation oracles want bounded second derivatives.
template <class T>
TensorT<T> smooth_tensor(int c, int h, int w, Rng& rng) {
  TensorT<T> t(c, h, w);
  for (int ch = 0; ch < c; ++ch) {
    const double ax = 0.5 + rng.uniform(), ay = 0.5 + rng.uniform();
    const double px = rng.uniform() * 6.28, py = rng.uniform() * 6.28;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        t.at(ch, y, x) = static_cast<T>(
            0.5 + 0.2 * std::sin(ax * 6.28 * x / w + px) * std::cos(ay * 6.28 * y / h + py) +
            0.15 * std::sin(2.1 * 6.28 * (x + y) / (w + h)));
  }
  return t;
}

/// Reference convolution, plain quintuple loop. Shares no code with the
/// GEMM path it oracles.
template <class T>
TensorT<T> naive_conv2d(const TensorT<T>& in, const TensorT<T>& w, const TensorT<T>* bias,
                        int stride, int pad) {
  const int co = w.shape[0], ci = w.shape[1], kh = w.shape[2], kw = w.shape[3];
  const int ho = (in.shape[1] + 2 * pad - kh) / stride + 1;
  const int wo = (in.shape[2] + 2 * pad - kw) / stride + 1;
  TensorT<T> out(co, ho, wo);
  for (int c = 0; c < co; ++c)
    for (int yo = 0; yo < ho; ++yo)
      for (int xo = 0; xo < wo; ++xo) {
        double acc = bias ? static_cast<double>(bias->data[c]) : 0.0;
        for (int b = 0; b < ci; ++b)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const int yi = yo * stride + ky - pad;
              const int xi = xo * stride + kx - pad;
              if (yi < 0 || yi >= in.shape[1] || xi < 0 || xi >= in.shape[2]) continue;
              acc += static_cast<double>(w.data[((static_cast<std::int64_t>(c) * ci + b) * kh + ky) * kw + kx]) *
                     in.at(b, yi, xi);
            }
        out.at(c, yo, xo) = static_cast<T>(acc);
      }
  return out;
}

struct GradCheckResult {
  double max_rel_err = 0;
  int probes = 0;
};

/// Centered finite-difference check of reverse-mode gradients.
/// `build` must construct the scalar output from the leaves on every call.
/// Runs in the leaves' scalar type; use double for meaningful tolerances.
template <class T>
GradCheckResult grad_check(std::vector<VarT<T>>& leaves,
                           const std::function<VarT<T>()>& build, Rng& rng,
                           int probes_per_leaf, T h) {
  for (auto& l : leaves) l.zero_grad();
  VarT<T> out = build();
  check_arg(out.value().numel() == 1, "grad_check: output must be scalar");
  backward(out);

  GradCheckResult res;
  for (auto& leaf : leaves) {
    for (int p = 0; p < probes_per_leaf; ++p) {
      const std::int64_t idx = static_cast<std::int64_t>(
          rng.next_u64() % static_cast<std::uint64_t>(leaf.value().numel()));
      const T orig = leaf.value().data[idx];
      T lo, hi;
      {
        NoGradGuard ng;
        leaf.value().data[idx] = orig + h;
        hi = build().value().data[0];
        leaf.value().data[idx] = orig - h;
        lo = build().value().data[0];
        leaf.value().data[idx] = orig;
      }
      const double fd = (static_cast<double>(hi) - lo) / (2.0 * static_cast<double>(h));
      const double an = leaf.grad().empty() ? 0.0 : static_cast<double>(leaf.grad().data[idx]);
      const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
      res.max_rel_err = std::max(res.max_rel_err, rel);
      ++res.probes;
    }
  }
  return res;
}

}  // namespace crossnet::test
