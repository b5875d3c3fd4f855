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
#include <memory>
#include <unordered_set>
#include <vector>

#include "crossnet/core/tensor.hpp"

// Minimal reverse-mode autodiff over TensorT. Every operation builds a node
// holding its value; when grad recording is enabled the node also keeps its
// parents and a closure that routes the node's gradient to them. backward()
// walks the DAG once in reverse topological order, so shared subgraphs
// (skip connections) accumulate correctly.

namespace crossnet {

namespace detail {
inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

/// Scoped guard disabling gradient recording (inference mode).
class NoGradGuard {
 public:
  NoGradGuard() : prev_(detail::grad_enabled_flag()) {
    detail::grad_enabled_flag() = false;
  }
  ~NoGradGuard() { detail::grad_enabled_flag() = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

template <class T>
struct NodeT {
  TensorT<T> value;
  TensorT<T> grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<NodeT>> parents;
  std::function<void(NodeT&)> backprop;  // reads this->grad, feeds parents

  void accumulate(const TensorT<T>& g) {
    if (grad.empty()) {
      grad = g;
    } else {
      for (std::int64_t i = 0; i < g.numel(); ++i) grad.data[i] += g.data[i];
    }
  }
  void ensure_grad() {
    if (grad.empty()) grad = TensorT<T>(value.shape);
  }
};

template <class T>
class VarT {
 public:
  VarT() = default;
  explicit VarT(std::shared_ptr<NodeT<T>> n) : node_(std::move(n)) {}

  /// Constant (non-learnable) variable.
  static VarT constant(TensorT<T> v) {
    auto n = std::make_shared<NodeT<T>>();
    n->value = std::move(v);
    return VarT(n);
  }

  /// Leaf with gradient tracking (parameters, probed inputs).
  static VarT leaf(TensorT<T> v) {
    auto n = std::make_shared<NodeT<T>>();
    n->value = std::move(v);
    n->requires_grad = true;
    return VarT(n);
  }

  bool defined() const { return node_ != nullptr; }
  const TensorT<T>& value() const { return node_->value; }
  TensorT<T>& value() { return node_->value; }
  const TensorT<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  std::shared_ptr<NodeT<T>> node() const { return node_; }

  void zero_grad() {
    if (node_) node_->grad = TensorT<T>();
  }

 private:
  std::shared_ptr<NodeT<T>> node_;
};

/// Builds an op node. `parents` that do not require grad are still recorded
/// so the closure can read their values during backprop.
template <class T>
VarT<T> make_op(TensorT<T> value, std::vector<VarT<T>> parents,
                std::function<void(NodeT<T>&)> backprop) {
  auto n = std::make_shared<NodeT<T>>();
  n->value = std::move(value);
  if (grad_enabled()) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      n->requires_grad = true;
      for (auto& p : parents) n->parents.push_back(p.node());
      n->backprop = std::move(backprop);
    }
  }
  return VarT<T>(n);
}

/// Reverse-mode sweep from `root`, seeding with ones (or a caller seed).
template <class T>
void backward(const VarT<T>& root, const TensorT<T>* seed = nullptr) {
  auto r = root.node();
  check_arg(r != nullptr, "backward: undefined variable");
  if (!r->requires_grad) return;

  // Iterative post-order DFS; topo holds parents before children.
  std::vector<std::shared_ptr<NodeT<T>>> topo;
  std::unordered_set<NodeT<T>*> seen;
  std::vector<std::pair<std::shared_ptr<NodeT<T>>, size_t>> stack;
  stack.emplace_back(r, 0);
  seen.insert(r.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      auto p = node->parents[idx++];
      if (p->requires_grad && seen.insert(p.get()).second)
        stack.emplace_back(p, 0);
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  if (seed) {
    check_arg(seed->shape == r->value.shape, "backward: seed shape mismatch");
    r->accumulate(*seed);
  } else {
    r->accumulate(full_like(r->value, T(1)));
  }
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    auto& n = **it;
    if (n.backprop && !n.grad.empty()) n.backprop(n);
  }
}

}  // namespace crossnet
