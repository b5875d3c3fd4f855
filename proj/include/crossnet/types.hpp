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

#include "crossnet/core/autodiff.hpp"
#include "crossnet/core/tensor.hpp"

namespace crossnet {

// Model-facing scalar type. The numeric kernels are templated; tests
// instantiate them in double where finite-difference oracles need the
// headroom.
using Scalar = float;
using Tensor = TensorT<Scalar>;
using Var = VarT<Scalar>;

/// (channels, height, width) raster, values nominally in [0,1]. Clamping
/// happens only at I/O boundaries, never inside the network.
using Image = Tensor;

/// Per-pixel displacement map at one pyramid scale. Channel 0 is the
/// horizontal component, channel 1 the vertical one, in pixels of this
/// field's own grid. scale_index i means resolution = full / 2^i.
struct FlowField {
  Tensor data;  // (2, h, w)
  int scale_index = 0;
};

inline Image clamp01(Image img) {
  for (auto& v : img.data) v = std::min(std::max(v, Scalar(0)), Scalar(1));
  return img;
}

}  // namespace crossnet
