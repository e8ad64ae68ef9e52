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

#ifndef PSNET_TRAINING_H_
#define PSNET_TRAINING_H_

// Augmentation, checkpoints and the training recipes for PS-FCN, LCNet and
// PS-FCN trained on LCNet-estimated lights.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "psnet/adam.h"
#include "psnet/dataset.h"
#include "psnet/io.h"
#include "psnet/lcnet.h"
#include "psnet/psfcn.h"

namespace psnet {

struct AugmentOptions {
  bool noise = true;
  double noise_amplitude = 0.025;
  // Independent random width and height in [min_size, max_size].
  bool rescale = true;
  int min_size = 32;
  int max_size = 128;
  bool crop = true;
  int crop_size = 32;
  // Crops are redrawn until at least this fraction is foreground (best of
  // a bounded number of tries otherwise).
  double min_foreground = 0.5;
  // Replace each light intensity with a draw from [intensity_min,
  // intensity_max] and scale its image to match.
  bool intensity_scaling = false;
  double intensity_min = 0.2;
  double intensity_max = 2.0;
};

struct TrainingInstance {
  Tensor images;  // [q,3,h,w]
  std::vector<DirectionalLight> lights;
  NormalMap normals;
  // Crop origin in the (possibly rescaled) frame; zero without cropping.
  int crop_top = 0;
  int crop_left = 0;
};

// Throws UsageError when cropping is requested from a sample smaller than
// the crop.
TrainingInstance augment(const RenderedSample& sample, const AugmentOptions& options, std::uint64_t seed);

// Bilinear resize of [C,H,W] (pixel-centre aligned).
Tensor resize_bilinear(const Tensor& image, int height, int width);

// initial_lr / 2^floor(epoch / halving_period), epochs counted from 0.
double learning_rate(double initial_lr, int epoch, int halving_period = 5);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double learning_rate = 0;
  double wall_seconds = 0;
  // Recipe-specific validation numbers, e.g. normal_mae_degrees.
  nlohmann::json validation = nlohmann::json::object();
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double initial_lr = 1e-3;
  int lr_halving_period = 5;
  int images_per_sample = 16;
  std::uint64_t seed = 0;
  AugmentOptions augment;
  // Appends one JSON object per epoch when non-empty.
  std::string log_path;
  // Stop after this many samples per epoch (0 = all); for quick runs.
  int max_samples_per_epoch = 0;
  std::function<void(const EpochLog&)> on_epoch;

  // Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

nlohmann::json to_json(const PSFCNConfig& config);
PSFCNConfig psfcn_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LCNetConfig& config);
LCNetConfig lcnet_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  std::string kind;  // "psfcn" or "lcnet"
  nlohmann::json config;
  std::vector<NamedTensor> parameters;
  AdamState<float> optimizer;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::vector<EpochLog> history;
};

Checkpoint make_checkpoint(const PSFCNModel& model, const AdamState<float>& optimizer, int epoch, std::uint64_t seed);
Checkpoint make_checkpoint(const LCNetModel& model, const AdamState<float>& optimizer, int epoch, std::uint64_t seed);
// Throw ConfigError when the checkpoint holds another model kind or its
// tensors do not match the recorded configuration.
PSFCNModel psfcn_from_checkpoint(const Checkpoint& checkpoint);
LCNetModel lcnet_from_checkpoint(const Checkpoint& checkpoint);

CheckpointFile to_checkpoint_file(const Checkpoint& checkpoint);
Checkpoint from_checkpoint_file(const CheckpointFile& file);
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

// Deterministic choice of `count` distinct light indices out of `available`.
std::vector<int> choose_lights(int available, int count, std::uint64_t seed);

Checkpoint train_psfcn(const PSFCNConfig& model_config, const TrainConfig& config, const SampleSource& data);
Checkpoint train_lcnet(const LCNetConfig& model_config, const TrainConfig& config, const SampleSource& data);
// LCNet stays frozen; PS-FCN sees LCNet's decoded lights, and images are
// divided by the estimated intensities.
Checkpoint train_psfcn_dagger(const PSFCNConfig& model_config, const TrainConfig& config, const LCNetModel& lcnet,
                              const SampleSource& data);

// Evaluation over whole samples with a fixed light subset per sample.
struct PSFCNEvaluation {
  double normal_mae_degrees = 0;
  std::vector<double> per_sample;
};

// Chooses which lights the network sees for a sample: ground truth by
// default, or e.g. LCNet estimates.
using LightProvider =
    std::function<std::vector<DirectionalLight>(const RenderedSample& sample, int sample_index)>;

PSFCNEvaluation evaluate_psfcn(const PSFCNModel& model, const SampleSource& data, const std::vector<int>& indices,
                               int images_per_sample, std::uint64_t seed, const LightProvider& lights = {});

struct LCNetEvaluation {
  double direction_mae_degrees = 0;
  double intensity_re = 0;
  double azimuth_accuracy = 0;
};

LCNetEvaluation evaluate_lcnet(const LCNetModel& model, const SampleSource& data, const std::vector<int>& indices,
                               int images_per_sample, std::uint64_t seed);

// Lights for the images of one sample as estimated by LCNet.
std::vector<DirectionalLight> estimate_lights(const LCNetModel& lcnet, const RenderedSample& sample);

}  // namespace psnet

#endif  // PSNET_TRAINING_H_
