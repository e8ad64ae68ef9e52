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

#ifndef PSNET_CLASSIC_PS_H_
#define PSNET_CLASSIC_PS_H_

// Non-learning photometric stereo: the per-pixel least-squares Lambertian
// solver, observation normalization and the GBR ambiguity.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "psnet/scene.h"
#include "psnet/tensor.h"

namespace psnet {

struct L2Solution {
  // mask marks pixels that were solved; rank-deficient pixels are 0.
  NormalMap normals;
  std::vector<double> albedo;  // per pixel, 0 where invalid
};

// images: [q,H,W] single channel or [q,3,H,W] RGB (reduced to the channel
// mean). Observations at or below `shadow_threshold` are treated as shadowed
// and dropped from that pixel's system. An empty mask means every pixel.
L2Solution l2_solve(const Tensor& images, const std::vector<DirectionalLight>& lights,
                    const std::vector<std::uint8_t>& mask = {}, double shadow_threshold = 1e-6);
L2Solution l2_solve(const Tensor64& images, const std::vector<DirectionalLight>& lights,
                    const std::vector<std::uint8_t>& mask = {}, double shadow_threshold = 1e-6);

// stack: [q,C,H,W]. Each (channel, pixel) profile over the q images is
// scaled to unit L2 norm; all-zero profiles stay zero.
template <typename T>
BasicTensor<T> normalize_observations(const BasicTensor<T>& stack);

// Multiplies by sqrt(test_count / train_count).
template <typename T>
BasicTensor<T> test_time_rescale(const BasicTensor<T>& stack, int test_count, int train_count);

struct GBRMatrix {
  double mu = 0;
  double nu = 0;
  double lambda = 1;

  // [[1,0,0],[0,1,0],[mu,nu,lambda]]
  Eigen::Matrix3d matrix() const;
};

struct GBRScene {
  NormalMap normals;
  std::vector<double> albedo;
  std::vector<DirectionalLight> lights;
};

GBRScene gbr_transform(const NormalMap& normals, const std::vector<double>& albedo,
                       const std::vector<DirectionalLight>& lights, const GBRMatrix& g);

}  // namespace psnet

#endif  // PSNET_CLASSIC_PS_H_
