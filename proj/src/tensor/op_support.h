// Copyright 2026 The psnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSNET_OP_SUPPORT_H_
#define PSNET_OP_SUPPORT_H_

// Shared helpers for op implementations. Not part of the public surface.

#include <initializer_list>
#include <utility>

#include "psnet/tensor.h"

namespace psnet::detail {

template <typename T>
using BackwardFn = std::function<void(Node<T>&)>;

// Wraps a freshly computed value as an op result. History is recorded only
// when grad mode is on and some input requires grad.
template <typename T>
BasicTensor<T> make_result(Shape shape, std::vector<T> value,
                           std::initializer_list<const BasicTensor<T>*> inputs,
                           BackwardFn<T> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (NoGradGuard::grad_enabled()) {
    for (const BasicTensor<T>* in : inputs) needs = needs || in->requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const BasicTensor<T>* in : inputs) node->parents.push_back(in->node());
    node->backward = std::move(backward);
  }
  return BasicTensor<T>(std::move(node));
}

// Grad buffer of parent i if it participates in differentiation.
template <typename T>
std::vector<T>* parent_grad(Node<T>& node, std::size_t i) {
  Node<T>& p = *node.parents[i];
  return p.requires_grad ? &p.ensure_grad() : nullptr;
}

}  // namespace psnet::detail

#endif  // PSNET_OP_SUPPORT_H_
