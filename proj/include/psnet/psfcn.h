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

#ifndef PSNET_PSFCN_H_
#define PSNET_PSFCN_H_

// Calibrated normal estimation from an unordered set of image-light pairs:
// a shared-weight extractor applied to every pair, element-wise max fusion
// and a regression head producing unit normals.

#include <cstdint>
#include <string>
#include <vector>

#include "psnet/layers.h"
#include "psnet/scene.h"
#include "psnet/tensor.h"

namespace psnet {

enum class PSFCNInputMode {
  kCalibrated,  // image + tiled light direction
  kNormalized,  // per-pixel normalized image + tiled light direction
  kImagesOnly,  // image only (uncalibrated)
};

std::string to_string(PSFCNInputMode mode);
// Throws ConfigError on unknown names.
PSFCNInputMode psfcn_input_mode_from_string(const std::string& name);

struct PSFCNConfig {
  double width_multiplier = 0.25;
  PSFCNInputMode input_mode = PSFCNInputMode::kCalibrated;
  // Explicit channel plans override the width multiplier: 7 extractor
  // entries and 3 hidden regression entries (the projection to 3 is fixed).
  std::vector<int> extractor_channels;
  std::vector<int> regression_channels;
  // Image count the model was trained with; sets the test-time rescale in
  // kNormalized mode.
  int train_image_count = 32;
  double leaky_slope = 0.1;

  std::vector<int> resolved_extractor_channels() const;
  std::vector<int> resolved_regression_channels() const;
  int input_channels() const { return input_mode == PSFCNInputMode::kImagesOnly ? 3 : 6; }
  bool needs_lights() const { return input_mode != PSFCNInputMode::kImagesOnly; }
  // Throws ConfigError.
  void validate() const;
};

template <typename T>
struct BasicPSFCN {
  PSFCNConfig config;
  std::vector<ConvLayer<T>> extractor;
  std::vector<ConvLayer<T>> regressor;

  std::vector<BasicTensor<T>> parameters() const;
  std::size_t parameter_count() const;
};

using PSFCNModel = BasicPSFCN<float>;

template <typename T>
BasicPSFCN<T> build_psfcn(const PSFCNConfig& config, std::uint64_t seed);

// Network input [q,C,H,W] from images [q,3,H,W]. Images are divided by the
// light intensities when lights are given; kNormalized then applies the
// per-pixel observation normalization and the test-time rescale. Throws
// UsageError when H or W is not a multiple of 4 or lights are missing or
// mismatched.
template <typename T>
BasicTensor<T> psfcn_input(const PSFCNConfig& config, const BasicTensor<T>& images,
                           const std::vector<DirectionalLight>& lights);

// Per-pair extractor features [q,C,H/2,W/2].
template <typename T>
BasicTensor<T> psfcn_features(const BasicPSFCN<T>& model, const BasicTensor<T>& input);

// Fused features [1,C,H/2,W/2].
template <typename T>
BasicTensor<T> psfcn_fuse(const BasicPSFCN<T>& model, const BasicTensor<T>& input);

// Unit normals [3,H,W] for a prepared input.
template <typename T>
BasicTensor<T> psfcn_predict(const BasicPSFCN<T>& model, const BasicTensor<T>& input);

// End to end. Pixels outside `mask` (when given) are zeroed and marked
// background.
NormalMap psfcn_forward(const PSFCNModel& model, const Tensor& images, const std::vector<DirectionalLight>& lights,
                        const std::vector<std::uint8_t>& mask = {});

// Post-fusion activation [C,H/2,W/2].
Tensor fused_feature_probe(const PSFCNModel& model, const Tensor& images,
                           const std::vector<DirectionalLight>& lights);

}  // namespace psnet

#endif  // PSNET_PSFCN_H_
