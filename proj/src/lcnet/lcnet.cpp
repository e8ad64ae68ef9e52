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

#include "psnet/lcnet.h"

#include <algorithm>
#include <cmath>

#include "psnet/errors.h"
#include "psnet/ops.h"

namespace psnet {
namespace {

const std::vector<int> kConvPlan{64, 128, 128, 256, 256, 256};
const std::vector<int> kFCPlan{1024, 512};

std::vector<int> scaled(const std::vector<int>& plan, double width) {
  std::vector<int> out;
  for (int c : plan) out.push_back(std::max(1, static_cast<int>(std::lround(c * width))));
  return out;
}

std::vector<double> softmax_row(std::span<const float> row) {
  const float top = *std::max_element(row.begin(), row.end());
  std::vector<double> p(row.size());
  double total = 0;
  for (std::size_t i = 0; i < row.size(); ++i) total += p[i] = std::exp(static_cast<double>(row[i]) - top);
  for (double& v : p) v /= total;
  return p;
}

int argmax(const std::vector<double>& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

std::string to_string(LCNetHeadMode mode) {
  return mode == LCNetHeadMode::kClassification ? "classification" : "regression";
}

LCNetHeadMode lcnet_head_mode_from_string(const std::string& name) {
  if (name == "classification") return LCNetHeadMode::kClassification;
  if (name == "regression") return LCNetHeadMode::kRegression;
  throw ConfigError("unknown LCNet head mode '" + name + "'");
}

std::vector<int> LCNetConfig::resolved_conv_channels() const {
  return conv_channels.empty() ? scaled(kConvPlan, width_multiplier) : conv_channels;
}

std::vector<int> LCNetConfig::resolved_fc_channels() const {
  return fc_channels.empty() ? scaled(kFCPlan, width_multiplier) : fc_channels;
}

int LCNetConfig::feature_size() const {
  int s = input_size;
  for (std::size_t i = 0; i < kConvPlan.size(); ++i) s = (s - 1) / 2 + 1;
  return s;
}

int LCNetConfig::local_feature_dim() const {
  return resolved_conv_channels().back() * feature_size() * feature_size();
}

void LCNetConfig::validate() const {
  grid.validate();
  if (!(width_multiplier > 0)) throw ConfigError("LCNetConfig: width_multiplier must be positive");
  if (input_size < 1) throw ConfigError("LCNetConfig: input_size must be positive");
  if (!conv_channels.empty() && conv_channels.size() != 6) throw ConfigError("LCNetConfig: conv plan needs 6 entries");
  if (!fc_channels.empty() && fc_channels.size() != 2) throw ConfigError("LCNetConfig: fc plan needs 2 entries");
  for (int c : resolved_conv_channels()) {
    if (c < 1) throw ConfigError("LCNetConfig: channel counts must be positive");
  }
  for (int c : resolved_fc_channels()) {
    if (c < 1) throw ConfigError("LCNetConfig: channel counts must be positive");
  }
}

template <typename T>
std::vector<BasicTensor<T>> BasicLCNet<T>::parameters() const {
  std::vector<BasicTensor<T>> out;
  append_parameters(extractor, out);
  append_parameters(hidden, out);
  append_parameters(heads, out);
  return out;
}

template <typename T>
std::size_t BasicLCNet<T>::parameter_count() const {
  return total_numel(parameters());
}

template <typename T>
BasicLCNet<T> build_lcnet(const LCNetConfig& config, std::uint64_t seed) {
  config.validate();
  BasicLCNet<T> model;
  model.config = config;
  std::mt19937_64 rng(seed);
  const double slope = config.leaky_slope;
  int in = 4;
  for (int c : config.resolved_conv_channels()) {
    model.extractor.push_back(make_conv<T>(in, c, 3, 2, 1, false, slope, rng));
    in = c;
  }
  in = 2 * config.local_feature_dim();
  for (int c : config.resolved_fc_channels()) {
    model.hidden.push_back(make_dense<T>(in, c, slope, rng));
    in = c;
  }
  if (config.head_mode == LCNetHeadMode::kClassification) {
    model.heads.push_back(make_dense<T>(in, config.grid.direction_bins, 1.0, rng));
    model.heads.push_back(make_dense<T>(in, config.grid.direction_bins, 1.0, rng));
    model.heads.push_back(make_dense<T>(in, config.grid.intensity_bins, 1.0, rng));
  } else {
    model.heads.push_back(make_dense<T>(in, 3, 1.0, rng));
    model.heads.push_back(make_dense<T>(in, 1, 1.0, rng));
  }
  return model;
}

template <typename T>
BasicTensor<T> lcnet_input(const LCNetConfig& config, const BasicTensor<T>& images,
                           const std::vector<std::uint8_t>& mask) {
  const int s = config.input_size;
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != s || images.dim(3) != s) {
    throw UsageError("LCNet: images must be [q,3," + std::to_string(s) + "," + std::to_string(s) + "], got " +
                     shape_string(images.shape()));
  }
  const int q = images.dim(0);
  if (q < 1) throw UsageError("LCNet: need at least one image");
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  if (!mask.empty() && mask.size() != plane) throw UsageError("LCNet: mask size does not match the images");
  BasicTensor<T> input({q, 4, s, s});
  auto src = images.values();
  auto dst = input.values();
  for (int i = 0; i < q; ++i) {
    T* frame = dst.data() + static_cast<std::size_t>(i) * 4 * plane;
    std::copy(src.begin() + i * 3 * plane, src.begin() + (i + 1) * 3 * plane, frame);
    for (std::size_t p = 0; p < plane; ++p) frame[3 * plane + p] = (mask.empty() || mask[p]) ? T(1) : T(0);
  }
  return input;
}

template <typename T>
BasicTensor<T> lcnet_local_features(const BasicLCNet<T>& model, const BasicTensor<T>& input) {
  const int s = model.config.input_size;
  if (input.rank() != 4 || input.dim(1) != 4 || input.dim(2) != s || input.dim(3) != s) {
    throw UsageError("LCNet: input must be [q,4," + std::to_string(s) + "," + std::to_string(s) + "], got " +
                     shape_string(input.shape()));
  }
  const T slope = static_cast<T>(model.config.leaky_slope);
  BasicTensor<T> x = input;
  for (const auto& layer : model.extractor) x = leaky_relu(layer(x), slope);
  return reshape(x, {input.dim(0), model.config.local_feature_dim()});
}

template <typename T>
LCNetOutput<T> lcnet_outputs(const BasicLCNet<T>& model, const BasicTensor<T>& input) {
  const T slope = static_cast<T>(model.config.leaky_slope);
  const BasicTensor<T> local = lcnet_local_features(model, input);
  const int q = local.dim(0);
  const BasicTensor<T> global = repeat_rows(max_over_batch(local), q);
  BasicTensor<T> x = concat_columns(local, global);
  for (const auto& layer : model.hidden) x = leaky_relu(layer(x), slope);
  LCNetOutput<T> out;
  if (model.config.head_mode == LCNetHeadMode::kClassification) {
    out.azimuth_logits = model.heads[0](x);
    out.elevation_logits = model.heads[1](x);
    out.intensity_logits = model.heads[2](x);
  } else {
    const BasicTensor<T> raw = reshape(model.heads[0](x), {q, 3, 1, 1});
    out.direction = reshape(l2_normalize_channels(raw, static_cast<T>(1e-12)), {q, 3});
    out.intensity = softplus(model.heads[1](x));
  }
  return out;
}

LightTargets light_targets(const std::vector<DirectionalLight>& lights, const LightingGrid& grid) {
  LightTargets t;
  for (const auto& l : lights) {
    t.directions.push_back(discretize_direction(l.direction, grid));
    t.intensity_bins.push_back(discretize_intensity(l.intensity, grid).bin);
  }
  return t;
}

template <typename T>
BasicTensor<T> lighting_loss(const LCNetOutput<T>& out, const LightTargets& targets,
                             const LightingLossWeights& weights) {
  std::vector<int> az, el;
  for (const auto& d : targets.directions) {
    az.push_back(d.azimuth);
    el.push_back(d.elevation);
  }
  BasicTensor<T> loss = scale(softmax_cross_entropy(out.azimuth_logits, az), static_cast<T>(weights.azimuth));
  loss = add(loss, scale(softmax_cross_entropy(out.elevation_logits, el), static_cast<T>(weights.elevation)));
  return add(loss, scale(softmax_cross_entropy(out.intensity_logits, targets.intensity_bins),
                         static_cast<T>(weights.intensity)));
}

template <typename T>
BasicTensor<T> lighting_regression_loss(const LCNetOutput<T>& out, const std::vector<DirectionalLight>& lights) {
  const int q = out.direction.dim(0);
  if (static_cast<int>(lights.size()) != q) throw UsageError("lighting_regression_loss: light count mismatch");
  BasicTensor<T> gt_dir({q, 3});
  BasicTensor<T> gt_e({q, 1});
  BasicTensor<T> inv_e({q, 1});
  for (int i = 0; i < q; ++i) {
    for (int c = 0; c < 3; ++c) gt_dir.values()[i * 3 + c] = static_cast<T>(lights[i].direction[c]);
    gt_e.values()[i] = static_cast<T>(lights[i].intensity);
    inv_e.values()[i] = static_cast<T>(1.0 / lights[i].intensity);
  }
  const BasicTensor<T> cosine = mean(sum_rows(mul(out.direction, gt_dir)));
  const BasicTensor<T> direction_term = sub(BasicTensor<T>::scalar(T(1)), cosine);
  const BasicTensor<T> intensity_term = mean(mul(abs(sub(out.intensity, gt_e)), inv_e));
  return add(direction_term, intensity_term);
}

LCNetPrediction lcnet_forward(const LCNetModel& model, const Tensor& images, const std::vector<std::uint8_t>& mask) {
  NoGradGuard guard;
  const LCNetOutput<float> out = lcnet_outputs(model, lcnet_input(model.config, images, mask));
  const int q = images.dim(0);
  const LightingGrid& grid = model.config.grid;
  LCNetPrediction pred;
  if (model.config.head_mode == LCNetHeadMode::kRegression) {
    for (int i = 0; i < q; ++i) {
      const Eigen::Vector3d d(out.direction[i * 3], out.direction[i * 3 + 1], out.direction[i * 3 + 2]);
      pred.lights.push_back({d.normalized(), static_cast<double>(out.intensity[i])});
    }
    return pred;
  }
  auto row = [](const Tensor& t, int i) {
    const int k = t.dim(1);
    return std::span<const float>(t.values().data() + static_cast<std::size_t>(i) * k, k);
  };
  for (int i = 0; i < q; ++i) {
    pred.azimuth_probabilities.push_back(softmax_row(row(out.azimuth_logits, i)));
    pred.elevation_probabilities.push_back(softmax_row(row(out.elevation_logits, i)));
    pred.intensity_probabilities.push_back(softmax_row(row(out.intensity_logits, i)));
    pred.lights.push_back({decode_direction(argmax(pred.azimuth_probabilities.back()),
                                            argmax(pred.elevation_probabilities.back()), grid),
                           decode_intensity(argmax(pred.intensity_probabilities.back()), grid)});
  }
  return pred;
}

#define PSNET_INSTANTIATE_LCNET(T)                                                                              \
  template struct BasicLCNet<T>;                                                                                \
  template BasicLCNet<T> build_lcnet<T>(const LCNetConfig&, std::uint64_t);                                    \
  template BasicTensor<T> lcnet_input(const LCNetConfig&, const BasicTensor<T>&, const std::vector<std::uint8_t>&); \
  template BasicTensor<T> lcnet_local_features(const BasicLCNet<T>&, const BasicTensor<T>&);                   \
  template LCNetOutput<T> lcnet_outputs(const BasicLCNet<T>&, const BasicTensor<T>&);                          \
  template BasicTensor<T> lighting_loss(const LCNetOutput<T>&, const LightTargets&, const LightingLossWeights&); \
  template BasicTensor<T> lighting_regression_loss(const LCNetOutput<T>&, const std::vector<DirectionalLight>&);

PSNET_INSTANTIATE_LCNET(float)
PSNET_INSTANTIATE_LCNET(double)

}  // namespace psnet
