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
#include <cstdint>
#include <numeric>
#include <vector>

#include "crossnet/core/common.hpp"

namespace crossnet {

// Dense row-major tensor. Rasters use shape (channels, height, width);
// convolution weights use (out_ch, in_ch, kh, kw).
template <class T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> dims) : shape(std::move(dims)) {
    data.assign(numel_of(shape), T(0));
  }
  TensorT(int c, int h, int w) : TensorT(std::vector<int>{c, h, w}) {}

  static std::int64_t numel_of(const std::vector<int>& dims) {
    std::int64_t n = dims.empty() ? 0 : 1;
    for (int d : dims) {
      if (d <= 0) throw DomainError("tensor dimension must be positive");
      n *= d;
    }
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  bool empty() const { return data.empty(); }
  int ndim() const { return static_cast<int>(shape.size()); }

  int channels() const { return shape.at(0); }
  int height() const { return shape.at(ndim() - 2); }
  int width() const { return shape.at(ndim() - 1); }

  T& at(int c, int y, int x) {
    return data[(static_cast<std::int64_t>(c) * height() + y) * width() + x];
  }
  const T& at(int c, int y, int x) const {
    return data[(static_cast<std::int64_t>(c) * height() + y) * width() + x];
  }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

template <class T>
TensorT<T> full_like(const TensorT<T>& t, T v) {
  TensorT<T> out(t.shape);
  out.fill(v);
  return out;
}

template <class T>
T max_abs_diff(const TensorT<T>& a, const TensorT<T>& b) {
  check_arg(a.same_shape(b), "max_abs_diff: shape mismatch");
  T m = 0;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

inline std::string shape_str(const std::vector<int>& dims) {
  std::string s = "(";
  for (size_t i = 0; i < dims.size(); ++i)
    s += (i ? "," : "") + std::to_string(dims[i]);
  return s + ")";
}

}  // namespace crossnet
