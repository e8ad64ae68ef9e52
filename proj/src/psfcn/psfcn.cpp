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

#include "psnet/psfcn.h"

#include <cmath>

#include "psnet/classic_ps.h"
#include "psnet/errors.h"
#include "psnet/ops.h"

namespace psnet {
namespace {

const std::vector<int> kExtractorPlan{64, 128, 128, 256, 256, 128, 128};
const std::vector<int> kRegressionPlan{128, 128, 64};
// Strides of the extractor; a negative entry is a stride-2 deconvolution.
const std::vector<int> kExtractorStrides{1, 2, 1, 2, 1, -2, 1};

std::vector<int> scaled(const std::vector<int>& plan, double width) {
  std::vector<int> out;
  for (int c : plan) out.push_back(std::max(1, static_cast<int>(std::lround(c * width))));
  return out;
}

template <typename T>
ConvLayer<T> layer_for(int in, int out, int stride, double slope, std::mt19937_64& rng) {
  if (stride < 0) return make_conv<T>(in, out, 4, -stride, 1, true, slope, rng);
  return make_conv<T>(in, out, 3, stride, 1, false, slope, rng);
}

}  // namespace

std::string to_string(PSFCNInputMode mode) {
  switch (mode) {
    case PSFCNInputMode::kCalibrated: return "calibrated";
    case PSFCNInputMode::kNormalized: return "normalized";
    case PSFCNInputMode::kImagesOnly: return "images_only";
  }
  return "?";
}

PSFCNInputMode psfcn_input_mode_from_string(const std::string& name) {
  if (name == "calibrated") return PSFCNInputMode::kCalibrated;
  if (name == "normalized") return PSFCNInputMode::kNormalized;
  if (name == "images_only") return PSFCNInputMode::kImagesOnly;
  throw ConfigError("unknown PS-FCN input mode '" + name + "'");
}

std::vector<int> PSFCNConfig::resolved_extractor_channels() const {
  return extractor_channels.empty() ? scaled(kExtractorPlan, width_multiplier) : extractor_channels;
}

std::vector<int> PSFCNConfig::resolved_regression_channels() const {
  return regression_channels.empty() ? scaled(kRegressionPlan, width_multiplier) : regression_channels;
}

void PSFCNConfig::validate() const {
  if (!(width_multiplier > 0)) throw ConfigError("PSFCNConfig: width_multiplier must be positive");
  if (!extractor_channels.empty() && extractor_channels.size() != 7) {
    throw ConfigError("PSFCNConfig: extractor plan needs 7 entries");
  }
  if (!regression_channels.empty() && regression_channels.size() != 3) {
    throw ConfigError("PSFCNConfig: regression plan needs 3 hidden entries");
  }
  for (int c : resolved_extractor_channels()) {
    if (c < 1) throw ConfigError("PSFCNConfig: channel counts must be positive");
  }
  for (int c : resolved_regression_channels()) {
    if (c < 1) throw ConfigError("PSFCNConfig: channel counts must be positive");
  }
  if (train_image_count < 1) throw ConfigError("PSFCNConfig: train_image_count must be >= 1");
}

template <typename T>
std::vector<BasicTensor<T>> BasicPSFCN<T>::parameters() const {
  std::vector<BasicTensor<T>> out;
  append_parameters(extractor, out);
  append_parameters(regressor, out);
  return out;
}

template <typename T>
std::size_t BasicPSFCN<T>::parameter_count() const {
  return total_numel(parameters());
}

template <typename T>
BasicPSFCN<T> build_psfcn(const PSFCNConfig& config, std::uint64_t seed) {
  config.validate();
  BasicPSFCN<T> model;
  model.config = config;
  std::mt19937_64 rng(seed);
  const double slope = config.leaky_slope;
  const auto ex = config.resolved_extractor_channels();
  int in = config.input_channels();
  for (std::size_t i = 0; i < ex.size(); ++i) {
    model.extractor.push_back(layer_for<T>(in, ex[i], kExtractorStrides[i], slope, rng));
    in = ex[i];
  }
  const auto reg = config.resolved_regression_channels();
  model.regressor.push_back(layer_for<T>(in, reg[0], 1, slope, rng));
  model.regressor.push_back(layer_for<T>(reg[0], reg[1], 1, slope, rng));
  model.regressor.push_back(layer_for<T>(reg[1], reg[2], -2, slope, rng));
  // Linear projection to the normal; unit gain.
  model.regressor.push_back(layer_for<T>(reg[2], 3, 1, 1.0, rng));
  return model;
}

template <typename T>
BasicTensor<T> psfcn_input(const PSFCNConfig& config, const BasicTensor<T>& images,
                           const std::vector<DirectionalLight>& lights) {
  if (images.rank() != 4 || images.dim(1) != 3) {
    throw UsageError("PS-FCN: images must be [q,3,H,W], got " + shape_string(images.shape()));
  }
  const int q = images.dim(0), h = images.dim(2), w = images.dim(3);
  if (q < 1) throw UsageError("PS-FCN: need at least one image");
  if (h % 4 != 0 || w % 4 != 0) {
    throw UsageError("PS-FCN: image size " + std::to_string(h) + "x" + std::to_string(w) +
                     " is not a multiple of 4");
  }
  if (config.needs_lights() && lights.empty()) {
    throw UsageError("PS-FCN: mode '" + to_string(config.input_mode) + "' requires light directions");
  }
  if (!lights.empty() && static_cast<int>(lights.size()) != q) {
    throw UsageError("PS-FCN: " + std::to_string(q) + " images but " + std::to_string(lights.size()) + " lights");
  }
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  BasicTensor<T> prepared(images.shape());
  auto src = images.values();
  auto dst = prepared.values();
  for (int i = 0; i < q; ++i) {
    const double e = lights.empty() ? 1.0 : lights[i].intensity;
    if (!(e > 0)) throw UsageError("PS-FCN: light intensities must be positive");
    for (std::size_t k = 0; k < 3 * plane; ++k) {
      dst[i * 3 * plane + k] = static_cast<T>(src[i * 3 * plane + k] / e);
    }
  }
  if (config.input_mode == PSFCNInputMode::kNormalized) {
    prepared = test_time_rescale(normalize_observations(prepared), q, config.train_image_count);
  }
  const int channels = config.input_channels();
  BasicTensor<T> input({q, channels, h, w});
  auto in = input.values();
  auto p = prepared.values();
  for (int i = 0; i < q; ++i) {
    T* frame = in.data() + static_cast<std::size_t>(i) * channels * plane;
    std::copy(p.begin() + i * 3 * plane, p.begin() + (i + 1) * 3 * plane, frame);
    if (channels == 6) {
      for (int c = 0; c < 3; ++c) {
        std::fill(frame + (3 + c) * plane, frame + (4 + c) * plane, static_cast<T>(lights[i].direction[c]));
      }
    }
  }
  return input;
}

template <typename T>
BasicTensor<T> psfcn_features(const BasicPSFCN<T>& model, const BasicTensor<T>& input) {
  if (input.rank() != 4 || input.dim(1) != model.config.input_channels()) {
    throw UsageError("PS-FCN: input must be [q," + std::to_string(model.config.input_channels()) + ",H,W], got " +
                     shape_string(input.shape()));
  }
  const T slope = static_cast<T>(model.config.leaky_slope);
  BasicTensor<T> x = input;
  for (const auto& layer : model.extractor) x = leaky_relu(layer(x), slope);
  return x;
}

template <typename T>
BasicTensor<T> psfcn_fuse(const BasicPSFCN<T>& model, const BasicTensor<T>& input) {
  return max_over_batch(psfcn_features(model, input));
}

template <typename T>
BasicTensor<T> psfcn_predict(const BasicPSFCN<T>& model, const BasicTensor<T>& input) {
  const T slope = static_cast<T>(model.config.leaky_slope);
  BasicTensor<T> x = psfcn_fuse(model, input);
  for (std::size_t i = 0; i + 1 < model.regressor.size(); ++i) x = leaky_relu(model.regressor[i](x), slope);
  x = model.regressor.back()(x);
  x = l2_normalize_channels(x, static_cast<T>(1e-12));
  return reshape(x, {3, input.dim(2), input.dim(3)});
}

NormalMap psfcn_forward(const PSFCNModel& model, const Tensor& images, const std::vector<DirectionalLight>& lights,
                        const std::vector<std::uint8_t>& mask) {
  NoGradGuard guard;
  const Tensor input = psfcn_input(model.config, images, lights);
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(images.dim(2)) * images.dim(3)) {
    throw UsageError("PS-FCN: mask size does not match the images");
  }
  NormalMap out = NormalMap::from_tensor(psfcn_predict(model, input));
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    const bool foreground = mask.empty() || mask[p];
    out.mask[p] = foreground ? 1 : 0;
    if (!foreground) out.normals[p].setZero();
  }
  return out;
}

Tensor fused_feature_probe(const PSFCNModel& model, const Tensor& images,
                           const std::vector<DirectionalLight>& lights) {
  NoGradGuard guard;
  Tensor fused = psfcn_fuse(model, psfcn_input(model.config, images, lights));
  Shape s = fused.shape();
  return reshape(fused, {s[1], s[2], s[3]});
}

#define PSNET_INSTANTIATE_PSFCN(T)                                                                       \
  template struct BasicPSFCN<T>;                                                                         \
  template BasicPSFCN<T> build_psfcn<T>(const PSFCNConfig&, std::uint64_t);                              \
  template BasicTensor<T> psfcn_input(const PSFCNConfig&, const BasicTensor<T>&,                         \
                                      const std::vector<DirectionalLight>&);                             \
  template BasicTensor<T> psfcn_features(const BasicPSFCN<T>&, const BasicTensor<T>&);                   \
  template BasicTensor<T> psfcn_fuse(const BasicPSFCN<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> psfcn_predict(const BasicPSFCN<T>&, const BasicTensor<T>&);

PSNET_INSTANTIATE_PSFCN(float)
PSNET_INSTANTIATE_PSFCN(double)

}  // namespace psnet
