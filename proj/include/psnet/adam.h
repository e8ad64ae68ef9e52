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

#ifndef PSNET_ADAM_H_
#define PSNET_ADAM_H_

#include <cstdint>
#include <vector>

#include "psnet/tensor.h"

namespace psnet {

// Bias-corrected Adam. Moment buffers are index-aligned with the parameter
// list passed to adam_step.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Applies one update from the parameters' current grads (absent grads count
// as zero). Moment buffers are created on first use.
template <typename T>
void adam_step(std::vector<BasicTensor<T>>& params, AdamState<T>& state, double lr);

extern template void adam_step(std::vector<BasicTensor<float>>&, AdamState<float>&, double);
extern template void adam_step(std::vector<BasicTensor<double>>&, AdamState<double>&, double);

}  // namespace psnet

#endif  // PSNET_ADAM_H_
