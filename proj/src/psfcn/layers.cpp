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

#include "psnet/layers.h"

#include <cmath>

#include "psnet/ops.h"

namespace psnet {
namespace {

template <typename T>
BasicTensor<T> he_normal(Shape shape, double fan_in, double slope, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / ((1 + slope * slope) * fan_in)));
  BasicTensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(normal(rng));
  t.set_requires_grad(true);
  return t;
}

template <typename T>
BasicTensor<T> zero_bias(int n) {
  BasicTensor<T> b = BasicTensor<T>::zeros({n});
  b.set_requires_grad(true);
  return b;
}

}  // namespace

template <typename T>
BasicTensor<T> ConvLayer<T>::operator()(const BasicTensor<T>& x) const {
  return transposed ? deconv2d(x, weight, bias, stride, padding) : conv2d(x, weight, bias, stride, padding);
}

template <typename T>
BasicTensor<T> DenseLayer<T>::operator()(const BasicTensor<T>& x) const {
  return linear(x, weight, bias);
}

template <typename T>
ConvLayer<T> make_conv(int in, int out, int kernel, int stride, int padding, bool transposed, double slope,
                       std::mt19937_64& rng) {
  ConvLayer<T> layer;
  if (transposed) {
    // Each output sees about in*(k/stride)^2 inputs.
    const double fan_in = static_cast<double>(in) * kernel * kernel / (stride * stride);
    layer.weight = he_normal<T>({in, out, kernel, kernel}, fan_in, slope, rng);
  } else {
    layer.weight = he_normal<T>({out, in, kernel, kernel}, static_cast<double>(in) * kernel * kernel, slope, rng);
  }
  layer.bias = zero_bias<T>(out);
  layer.stride = stride;
  layer.padding = padding;
  layer.transposed = transposed;
  return layer;
}

template <typename T>
DenseLayer<T> make_dense(int in, int out, double slope, std::mt19937_64& rng) {
  return {he_normal<T>({out, in}, in, slope, rng), zero_bias<T>(out)};
}

template <typename T>
void append_parameters(const std::vector<ConvLayer<T>>& layers, std::vector<BasicTensor<T>>& out) {
  for (const auto& l : layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
}

template <typename T>
void append_parameters(const std::vector<DenseLayer<T>>& layers, std::vector<BasicTensor<T>>& out) {
  for (const auto& l : layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
}

template <typename T>
std::size_t total_numel(const std::vector<BasicTensor<T>>& tensors) {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.numel();
  return n;
}

#define PSNET_INSTANTIATE_LAYERS(T)                                                                     \
  template struct ConvLayer<T>;                                                                         \
  template struct DenseLayer<T>;                                                                        \
  template ConvLayer<T> make_conv<T>(int, int, int, int, int, bool, double, std::mt19937_64&);          \
  template DenseLayer<T> make_dense<T>(int, int, double, std::mt19937_64&);                             \
  template void append_parameters(const std::vector<ConvLayer<T>>&, std::vector<BasicTensor<T>>&);      \
  template void append_parameters(const std::vector<DenseLayer<T>>&, std::vector<BasicTensor<T>>&);     \
  template std::size_t total_numel(const std::vector<BasicTensor<T>>&);

PSNET_INSTANTIATE_LAYERS(float)
PSNET_INSTANTIATE_LAYERS(double)

}  // namespace psnet
