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

#ifndef PSNET_OPS_H_
#define PSNET_OPS_H_

#include <span>
#include <vector>

#include "psnet/tensor.h"

namespace psnet {

// Convolutions take [C,H,W] or [B,C,H,W] inputs and return the same rank.

// weight: [C_out, C_in, k, k]; bias: [C_out].
// Output extent floor((H + 2*padding - k) / stride) + 1.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, int stride, int padding);

// Transposed convolution, the adjoint of conv2d's linear map plus a bias.
// weight: [C_in, C_out, k, k]. Requires k - 2*padding == stride so the
// output extent is exactly stride*H.
template <typename T>
BasicTensor<T> deconv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                        const BasicTensor<T>& bias, int stride, int padding);

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope);

// x: [B,N], weight: [M,N], bias: [M] -> [B,M].
template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias);

// Divides each pixel's 3-vector (axis 0 of [3,H,W], axis 1 of [B,3,H,W])
// by max(norm, eps).
template <typename T>
BasicTensor<T> l2_normalize_channels(const BasicTensor<T>& x, T eps);

// Elementwise maximum over equally shaped tensors. The gradient goes to the
// first (lowest index) maximal contributor.
template <typename T>
BasicTensor<T> max_fuse(std::span<const BasicTensor<T>> features);

// max_fuse over the slices of axis 0: [q, ...] -> [1, ...].
template <typename T>
BasicTensor<T> max_over_batch(const BasicTensor<T>& x);

// Mean over rows of -log softmax(logits)[target]. logits: [B,K].
template <typename T>
BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                     std::span<const int> targets);

// Mean of (1 - <pred, gt>) over mask pixels. pred/gt: [3,H,W] (a leading
// batch extent of 1 is accepted); mask: [H,W], nonzero = inside.
template <typename T>
BasicTensor<T> cosine_loss(const BasicTensor<T>& pred, const BasicTensor<T>& gt,
                           const BasicTensor<T>& mask);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor);
template <typename T>
BasicTensor<T> abs(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> softplus(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x);
// [B,N] -> [B,1]
template <typename T>
BasicTensor<T> sum_rows(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape);
// [B,N], [B,M] -> [B,N+M]
template <typename T>
BasicTensor<T> concat_columns(const BasicTensor<T>& a, const BasicTensor<T>& b);
// [1,N] -> [rows,N]
template <typename T>
BasicTensor<T> repeat_rows(const BasicTensor<T>& x, int rows);

}  // namespace psnet

#endif  // PSNET_OPS_H_
