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

#ifndef PSNET_LCNET_H_
#define PSNET_LCNET_H_

// Lighting calibration from an unordered image set: a shared strided
// extractor gives one local feature per image, max fusion gives a global
// feature, and a shared head classifies each image's light over the
// discretized lighting space (or regresses it directly).

#include <cstdint>
#include <string>
#include <vector>

#include "psnet/layers.h"
#include "psnet/lighting_grid.h"
#include "psnet/scene.h"
#include "psnet/tensor.h"

namespace psnet {

enum class LCNetHeadMode { kClassification, kRegression };

std::string to_string(LCNetHeadMode mode);
// Throws ConfigError on unknown names.
LCNetHeadMode lcnet_head_mode_from_string(const std::string& name);

struct LCNetConfig {
  LightingGrid grid;
  double width_multiplier = 0.25;
  int input_size = 128;
  LCNetHeadMode head_mode = LCNetHeadMode::kClassification;
  // Explicit plans override the width multiplier: 6 conv entries, 2 hidden
  // fully connected entries.
  std::vector<int> conv_channels;
  std::vector<int> fc_channels;
  double leaky_slope = 0.1;

  std::vector<int> resolved_conv_channels() const;
  std::vector<int> resolved_fc_channels() const;
  // Spatial extent after the strided extractor.
  int feature_size() const;
  int local_feature_dim() const;
  // Throws ConfigError.
  void validate() const;
};

template <typename T>
struct BasicLCNet {
  LCNetConfig config;
  std::vector<ConvLayer<T>> extractor;
  std::vector<DenseLayer<T>> hidden;
  // Classification: azimuth, elevation, intensity. Regression: direction,
  // intensity.
  std::vector<DenseLayer<T>> heads;

  std::vector<BasicTensor<T>> parameters() const;
  std::size_t parameter_count() const;
};

using LCNetModel = BasicLCNet<float>;

template <typename T>
BasicLCNet<T> build_lcnet(const LCNetConfig& config, std::uint64_t seed);

template <typename T>
struct LCNetOutput {
  // Classification mode, [q,K_d], [q,K_d], [q,K_e].
  BasicTensor<T> azimuth_logits;
  BasicTensor<T> elevation_logits;
  BasicTensor<T> intensity_logits;
  // Regression mode, unit rows [q,3] and positive [q,1].
  BasicTensor<T> direction;
  BasicTensor<T> intensity;
};

// [q,4,S,S]: the images followed by the mask (all ones when empty). Throws
// UsageError unless images are [q,3,S,S] with S = config.input_size.
template <typename T>
BasicTensor<T> lcnet_input(const LCNetConfig& config, const BasicTensor<T>& images,
                           const std::vector<std::uint8_t>& mask);

// Local features [q,D].
template <typename T>
BasicTensor<T> lcnet_local_features(const BasicLCNet<T>& model, const BasicTensor<T>& input);

template <typename T>
LCNetOutput<T> lcnet_outputs(const BasicLCNet<T>& model, const BasicTensor<T>& input);

struct LightTargets {
  std::vector<DirectionBins> directions;
  std::vector<int> intensity_bins;
};

LightTargets light_targets(const std::vector<DirectionalLight>& lights, const LightingGrid& grid);

struct LightingLossWeights {
  double azimuth = 1;
  double elevation = 1;
  double intensity = 1;
};

// Weighted sum of the three cross-entropies, each averaged over the q images.
template <typename T>
BasicTensor<T> lighting_loss(const LCNetOutput<T>& out, const LightTargets& targets,
                             const LightingLossWeights& weights = {});

// Regression objective: mean (1 - cos) between directions plus mean
// |e - e_gt| / e_gt.
template <typename T>
BasicTensor<T> lighting_regression_loss(const LCNetOutput<T>& out, const std::vector<DirectionalLight>& lights);

struct LCNetPrediction {
  std::vector<DirectionalLight> lights;
  // Softmax probabilities per image; empty in regression mode.
  std::vector<std::vector<double>> azimuth_probabilities;
  std::vector<std::vector<double>> elevation_probabilities;
  std::vector<std::vector<double>> intensity_probabilities;
};

LCNetPrediction lcnet_forward(const LCNetModel& model, const Tensor& images, const std::vector<std::uint8_t>& mask);

}  // namespace psnet

#endif  // PSNET_LCNET_H_
