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

#ifndef PSNET_LAYERS_H_
#define PSNET_LAYERS_H_

// Parameterized building blocks shared by the networks.

#include <cstdint>
#include <random>
#include <vector>

#include "psnet/tensor.h"

namespace psnet {

template <typename T>
struct ConvLayer {
  BasicTensor<T> weight;  // [out,in,k,k], or [in,out,k,k] when transposed
  BasicTensor<T> bias;
  int stride = 1;
  int padding = 1;
  bool transposed = false;

  BasicTensor<T> operator()(const BasicTensor<T>& x) const;
};

template <typename T>
struct DenseLayer {
  BasicTensor<T> weight;  // [out,in]
  BasicTensor<T> bias;

  BasicTensor<T> operator()(const BasicTensor<T>& x) const;
};

// He-normal weights (gain for leaky ReLU), zero bias. Values are drawn in
// double so float and double builds from the same generator agree.
template <typename T>
ConvLayer<T> make_conv(int in, int out, int kernel, int stride, int padding, bool transposed, double slope,
                       std::mt19937_64& rng);
template <typename T>
DenseLayer<T> make_dense(int in, int out, double slope, std::mt19937_64& rng);

// Trainable tensors of a layer list, weight before bias.
template <typename T>
void append_parameters(const std::vector<ConvLayer<T>>& layers, std::vector<BasicTensor<T>>& out);
template <typename T>
void append_parameters(const std::vector<DenseLayer<T>>& layers, std::vector<BasicTensor<T>>& out);

template <typename T>
std::size_t total_numel(const std::vector<BasicTensor<T>>& tensors);


}  // namespace psnet

#endif  // PSNET_LAYERS_H_
