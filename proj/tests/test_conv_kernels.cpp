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

#include <doctest.h>

#include "crossnet/core/conv_kernels.hpp"
#include "crossnet/core/nn_ops.hpp"
#include "testutil.hpp"

using namespace crossnet;

TEST_CASE("conv2d matches the naive reference over layer geometries") {
  Rng rng(7);
  struct Geo {
    int ci, co, k, stride, pad, h, w;
  };
  // Every kernel/stride combination the networks use.
  const Geo geos[] = {
      {3, 8, 5, 1, 2, 13, 17}, {6, 8, 7, 2, 3, 16, 16}, {8, 12, 5, 2, 2, 15, 13},
      {4, 4, 3, 1, 1, 9, 8},   {5, 6, 3, 2, 1, 11, 7},  {2, 3, 3, 2, 1, 5, 5},
  };
  for (const auto& g : geos) {
    auto in = test::random_tensor<double>({g.ci, g.h, g.w}, rng, -1.0, 1.0);
    auto w = test::random_tensor<double>({g.co, g.ci, g.k, g.k}, rng, -0.5, 0.5);
    auto b = test::random_tensor<double>({g.co}, rng, -0.2, 0.2);
    auto ref = test::naive_conv2d(in, w, &b, g.stride, g.pad);
    auto out = conv2d_forward(in, w, &b, g.stride, g.pad);
    REQUIRE(out.shape == ref.shape);
    CHECK(max_abs_diff(out, ref) < 1e-12);
  }
}

TEST_CASE("conv2d rejects channel mismatch") {
  TensorT<float> in(3, 8, 8), w({4, 5, 3, 3});
  CHECK_THROWS_AS(conv2d_forward(in, w, nullptr, 1, 1), DomainError);
}

TEST_CASE("conv_transpose2d doubles spatial size with k4 s2 p1") {
  Rng rng(9);
  auto in = test::random_tensor<double>({6, 7, 9}, rng, -1.0, 1.0);
  auto w = test::random_tensor<double>({6, 4, 4, 4}, rng, -0.5, 0.5);
  auto out = conv_transpose2d_forward(in, w, nullptr, 2, 1);
  CHECK(out.shape == std::vector<int>{4, 14, 18});
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  // <conv(x), y> == <x, convT(y)> for matching geometry.
  Rng rng(21);
  const int ci = 5, co = 3, k = 4, s = 2, p = 1, h = 10, w = 12;
  auto x = test::random_tensor<double>({ci, h, w}, rng, -1.0, 1.0);
  auto wt = test::random_tensor<double>({ci, co, k, k}, rng, -0.5, 0.5);
  auto y = test::random_tensor<double>({ci, h, w}, rng, -1.0, 1.0);

  auto fwd = conv_transpose2d_forward(x, wt, nullptr, s, p);  // (co, 2h, 2w)
  auto z = test::random_tensor<double>({co, 2 * h, 2 * w}, rng, -1.0, 1.0);
  double lhs = 0;
  for (std::int64_t i = 0; i < fwd.numel(); ++i) lhs += fwd.data[i] * z.data[i];
  auto back = conv2d_forward(z, wt, nullptr, s, p);  // adjoint route
  double rhs = 0;
  for (std::int64_t i = 0; i < back.numel(); ++i) rhs += back.data[i] * x.data[i];
  (void)y;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("autodiff: conv/deconv/relu/concat gradients pass finite differences") {
  Rng rng(33);
  auto x = VarT<double>::leaf(test::random_tensor<double>({3, 8, 10}, rng, -1.0, 1.0));
  auto w1 = VarT<double>::leaf(test::random_tensor<double>({4, 3, 3, 3}, rng, -0.5, 0.5));
  auto b1 = VarT<double>::leaf(test::random_tensor<double>({4}, rng, -0.2, 0.2));
  auto wt = VarT<double>::leaf(test::random_tensor<double>({4, 2, 4, 4}, rng, -0.5, 0.5));
  auto bt = VarT<double>::leaf(test::random_tensor<double>({2}, rng, -0.2, 0.2));

  std::vector<VarT<double>> leaves{x, w1, b1, wt, bt};
  auto build = [&]() {
    auto h1 = relu(conv2d(x, w1, b1, 2, 1));
    auto h2 = conv_transpose2d(h1, wt, bt, 2, 1);
    auto both = concat_channels<double>({h2, crop_spatial(h2, h2.value().shape[1], h2.value().shape[2])});
    auto tgt = VarT<double>::constant(TensorT<double>(both.value().shape));
    return charbonnier_sum(both, tgt, 1e-3);
  };
  auto res = test::grad_check<double>(leaves, build, rng, 12, 1e-5);
  CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("upsample2x: constant field stays constant with value scaling") {
  TensorT<float> f(2, 5, 7);
  for (std::int64_t i = 0; i < f.numel() / 2; ++i) f.data[i] = 3.0f;
  for (std::int64_t i = f.numel() / 2; i < f.numel(); ++i) f.data[i] = -1.0f;
  auto up = upsample2x_bilinear_fwd(f, 2.0f);
  CHECK(up.shape == std::vector<int>{2, 10, 14});
  for (std::int64_t i = 0; i < up.numel() / 2; ++i) CHECK(up.data[i] == doctest::Approx(6.0f));
  for (std::int64_t i = up.numel() / 2; i < up.numel(); ++i) CHECK(up.data[i] == doctest::Approx(-2.0f));
}

TEST_CASE("upsample2x twice equals one 4x resample on affine fields") {
  // The half-pixel mapping composes exactly; affine fields are reproduced
  // by bilinear interpolation, so interior values must agree to roundoff.
  TensorT<double> f(1, 8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) f.at(0, y, x) = 0.3 * x - 0.7 * y + 1.0;
  auto up2 = upsample2x_bilinear_fwd(upsample2x_bilinear_fwd(f, 2.0), 2.0);
  // Direct 4x: sample (y/4 - 0.375, x/4 - 0.375), values scaled by 4.
  for (int y = 4; y < 28; ++y)
    for (int x = 4; x < 28; ++x) {
      const double sy = y * 0.25 - 0.375, sx = x * 0.25 - 0.375;
      const double want = 4.0 * (0.3 * sx - 0.7 * sy + 1.0);
      CHECK(up2.at(0, y, x) == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("autodiff: upsample2x gradient passes finite differences") {
  Rng rng(55);
  auto x = VarT<double>::leaf(test::smooth_tensor<double>(2, 6, 6, rng));
  std::vector<VarT<double>> leaves{x};
  auto build = [&]() {
    auto up = upsample2x_bilinear(x, 2.0);
    auto tgt = VarT<double>::constant(TensorT<double>(up.value().shape));
    return charbonnier_sum(up, tgt, 1e-3);
  };
  auto res = test::grad_check<double>(leaves, build, rng, 20, 1e-5);
  CHECK(res.max_rel_err < 1e-6);
}
