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


#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "psnet/errors.h"
#include "psnet/metrics.h"
#include "psnet/ops.h"
#include "psnet/random.h"
#include "psnet/training.h"

namespace psnet {
namespace {

using nlohmann::json;

// Stream tags for derive_seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kLightStream = 2;
constexpr std::uint64_t kAugmentStream = 3;
constexpr std::uint64_t kValidationStream = 4;
constexpr std::uint64_t kNoiseStream = 5;

void append_log(const std::string& path, const EpochLog& log) {
  if (path.empty()) return;
  json row = {{"epoch", log.epoch}, {"loss", log.train_loss}, {"lr", log.learning_rate},
              {"wall_seconds", log.wall_seconds}};
  for (auto it = log.validation.begin(); it != log.validation.end(); ++it) row[it.key()] = it.value();
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot append to training log " + path);
  out << row.dump() << "\n";
}

std::vector<int> shuffled(std::vector<int> items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(items[i], items[pick(rng)]);
  }
  return items;
}

std::vector<std::uint8_t> resize_mask(const std::vector<std::uint8_t>& mask, int h, int w, int size) {
  std::vector<float> values(mask.begin(), mask.end());
  const Tensor r = resize_bilinear(Tensor({1, h, w}, std::move(values)), size, size);
  std::vector<std::uint8_t> out(r.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r[i] >= 0.5f ? 1 : 0;
  return out;
}

Tensor resize_stack(const Tensor& images, int size) {
  const int q = images.dim(0), h = images.dim(2), w = images.dim(3);
  const std::size_t in_frame = static_cast<std::size_t>(3) * h * w;
  const std::size_t out_frame = static_cast<std::size_t>(3) * size * size;
  Tensor out({q, 3, size, size});
  for (int i = 0; i < q; ++i) {
    Tensor frame({3, h, w}, std::vector<float>(images.values().begin() + i * in_frame,
                                               images.values().begin() + (i + 1) * in_frame));
    const Tensor r = resize_bilinear(frame, size, size);
    std::copy(r.values().begin(), r.values().end(), out.values().begin() + i * out_frame);
  }
  return out;
}

struct Loop {
  const TrainConfig& config;
  const SampleSource& data;
  std::vector<Tensor> params;
  AdamState<float> optimizer;
  std::vector<EpochLog> history;

  // `loss` returns the unscaled loss of one sample; `validate` the
  // validation numbers of the current model.
  template <typename LossFn, typename ValidateFn>
  void run(LossFn loss, ValidateFn validate) {
    const std::vector<int>& train = data.split().train;
    if (train.empty()) throw ConfigError("train: the dataset has no training samples");
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const auto start = std::chrono::steady_clock::now();
      const double lr = learning_rate(config.initial_lr, epoch, config.lr_halving_period);
      std::vector<int> order = shuffled(train, derive_seed(config.seed, {kShuffleStream, std::uint64_t(epoch)}));
      if (config.max_samples_per_epoch > 0 && static_cast<int>(order.size()) > config.max_samples_per_epoch) {
        order.resize(config.max_samples_per_epoch);
      }
      double total = 0;
      for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
        const std::size_t end = std::min(order.size(), begin + config.batch_size);
        const float inv = 1.0f / static_cast<float>(end - begin);
        for (auto& p : params) p.zero_grad();
        for (std::size_t b = begin; b < end; ++b) {
          const Tensor l = loss(order[b], epoch);
          total += l.item();
          scale(l, inv).backward();
        }
        adam_step(params, optimizer, lr);
      }
      EpochLog log;
      log.epoch = epoch;
      log.train_loss = total / static_cast<double>(order.size());
      log.learning_rate = lr;
      log.validation = validate();
      log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      append_log(config.log_path, log);
      if (config.on_epoch) config.on_epoch(log);
      history.push_back(log);
    }
  }
};

std::vector<DirectionalLight> load_lights(const SampleSource& data, int index, int q, std::uint64_t seed,
                                          RenderedSample& sample) {
  sample = data.load(index, choose_lights(data.lights_per_sample(index), q, seed));
  return sample.lights;
}

void check_psfcn_data(const PSFCNConfig& model_config, const TrainConfig& config, const SampleSource& data) {
  model_config.validate();
  config.validate();
  if (data.size() < 1) throw ConfigError("train: empty dataset");
  const AugmentOptions& a = config.augment;
  if (a.crop) {
    if (a.crop_size % 4 != 0) throw ConfigError("train: PS-FCN crop size must be a multiple of 4");
    const int smallest = a.rescale ? a.min_size : data.resolution();
    if (smallest < a.crop_size) throw ConfigError("train: images are smaller than the crop");
  } else if (!a.rescale && data.resolution() % 4 != 0) {
    throw ConfigError("train: PS-FCN needs a resolution that is a multiple of 4");
  }
  for (int i = 0; i < data.size(); ++i) {
    if (data.lights_per_sample(i) < config.images_per_sample) {
      throw ConfigError("train: sample " + std::to_string(i) + " has fewer lights than images_per_sample");
    }
  }
}

Tensor psfcn_sample_loss(const PSFCNModel& model, const TrainingInstance& inst) {
  const Tensor input = psfcn_input(model.config, inst.images, inst.lights);
  const Tensor pred = psfcn_predict(model, input);
  return cosine_loss(pred, inst.normals.to_tensor(), inst.normals.mask_tensor());
}

json psfcn_validation(const PSFCNModel& model, const TrainConfig& config, const SampleSource& data,
                      const LightProvider& lights = {}) {
  const std::vector<int>& val = data.split().validation;
  if (val.empty()) return json::object();
  const PSFCNEvaluation e = evaluate_psfcn(model, data, val, config.images_per_sample,
                                           derive_seed(config.seed, {kValidationStream}), lights);
  return {{"validation_mae_degrees", e.normal_mae_degrees}};
}

Checkpoint finish(Checkpoint c, const Loop& loop) {
  c.history = loop.history;
  return c;
}

}  // namespace

std::vector<int> choose_lights(int available, int count, std::uint64_t seed) {
  if (count < 1 || count > available) {
    throw UsageError("choose_lights: cannot choose " + std::to_string(count) + " of " + std::to_string(available));
  }
  std::vector<int> all(available);
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, available - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<DirectionalLight> estimate_lights(const LCNetModel& lcnet, const RenderedSample& sample) {
  NoGradGuard no_grad;
  const int size = lcnet.config.input_size;
  const int h = sample.images.dim(2), w = sample.images.dim(3);
  if (h == size && w == size) return lcnet_forward(lcnet, sample.images, sample.normal_map.mask).lights;
  return lcnet_forward(lcnet, resize_stack(sample.images, size), resize_mask(sample.normal_map.mask, h, w, size))
      .lights;
}

PSFCNEvaluation evaluate_psfcn(const PSFCNModel& model, const SampleSource& data, const std::vector<int>& indices,
                               int images_per_sample, std::uint64_t seed, const LightProvider& lights) {
  if (indices.empty()) throw UsageError("evaluate_psfcn: no samples");
  NoGradGuard no_grad;
  PSFCNEvaluation out;
  double total = 0;
  for (int index : indices) {
    RenderedSample sample;
    load_lights(data, index, images_per_sample, derive_seed(seed, {std::uint64_t(index)}), sample);
    const std::vector<DirectionalLight> used = lights ? lights(sample, index) : sample.lights;
    const NormalMap pred = psfcn_forward(model, sample.images, used, sample.normal_map.mask);
    const double mae = mae_normals(pred, sample.normal_map).mae_degrees;
    out.per_sample.push_back(mae);
    total += mae;
  }
  out.normal_mae_degrees = total / static_cast<double>(indices.size());
  return out;
}

LCNetEvaluation evaluate_lcnet(const LCNetModel& model, const SampleSource& data, const std::vector<int>& indices,
                               int images_per_sample, std::uint64_t seed) {
  if (indices.empty()) throw UsageError("evaluate_lcnet: no samples");
  const LightingGrid& grid = model.config.grid;
  LCNetEvaluation out;
  double direction = 0, re = 0;
  std::size_t hits = 0, count = 0;
  for (int index : indices) {
    RenderedSample sample;
    load_lights(data, index, images_per_sample, derive_seed(seed, {std::uint64_t(index)}), sample);
    const std::vector<DirectionalLight> pred = estimate_lights(model, sample);
    std::vector<double> e, gt;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      direction += angle_between_deg(pred[i].direction, sample.lights[i].direction);
      Eigen::Vector3d d = pred[i].direction;
      d.z() = std::max(d.z(), 0.0);
      if (d.norm() > 0 &&
          discretize_direction(d, grid).azimuth == discretize_direction(sample.lights[i].direction, grid).azimuth) {
        ++hits;
      }
      e.push_back(pred[i].intensity);
      gt.push_back(sample.lights[i].intensity);
      ++count;
    }
    re += scale_invariant_re(e, gt).relative_error;
  }
  out.direction_mae_degrees = direction / static_cast<double>(count);
  out.intensity_re = re / static_cast<double>(indices.size());
  out.azimuth_accuracy = static_cast<double>(hits) / static_cast<double>(count);
  return out;
}

Checkpoint train_psfcn(const PSFCNConfig& model_config, const TrainConfig& config, const SampleSource& data) {
  check_psfcn_data(model_config, config, data);
  PSFCNConfig cfg = model_config;
  cfg.train_image_count = config.images_per_sample;
  PSFCNModel model = build_psfcn<float>(cfg, config.seed);
  Loop loop{config, data, model.parameters(), {}, {}};
  loop.run(
      [&](int index, int epoch) {
        const std::uint64_t e = static_cast<std::uint64_t>(epoch), i = static_cast<std::uint64_t>(index);
        RenderedSample sample;
        load_lights(data, index, config.images_per_sample, derive_seed(config.seed, {kLightStream, e, i}), sample);
        const TrainingInstance inst =
            augment(sample, config.augment, derive_seed(config.seed, {kAugmentStream, e, i}));
        return psfcn_sample_loss(model, inst);
      },
      [&] { return psfcn_validation(model, config, data); });
  return finish(make_checkpoint(model, loop.optimizer, config.epochs, config.seed), loop);
}

Checkpoint train_lcnet(const LCNetConfig& model_config, const TrainConfig& config, const SampleSource& data) {
  model_config.validate();
  config.validate();
  if (data.size() < 1) throw ConfigError("train: empty dataset");
  if (data.resolution() != model_config.input_size) {
    throw ConfigError("train: LCNet expects " + std::to_string(model_config.input_size) +
                      " pixel inputs but the dataset has resolution " + std::to_string(data.resolution()));
  }
  // LCNet sees whole fixed-size images, so only the photometric
  // augmentations apply.
  AugmentOptions options = config.augment;
  options.rescale = false;
  options.crop = false;
  LCNetModel model = build_lcnet<float>(model_config, config.seed);
  Loop loop{config, data, model.parameters(), {}, {}};
  loop.run(
      [&](int index, int epoch) {
        const std::uint64_t e = static_cast<std::uint64_t>(epoch), i = static_cast<std::uint64_t>(index);
        RenderedSample sample;
        load_lights(data, index, config.images_per_sample, derive_seed(config.seed, {kLightStream, e, i}), sample);
        const TrainingInstance inst = augment(sample, options, derive_seed(config.seed, {kAugmentStream, e, i}));
        const LCNetOutput<float> out = lcnet_outputs(model, lcnet_input(model.config, inst.images, inst.normals.mask));
        if (model.config.head_mode == LCNetHeadMode::kRegression) return lighting_regression_loss(out, inst.lights);
        return lighting_loss(out, light_targets(inst.lights, model.config.grid));
      },
      [&]() -> json {
        const std::vector<int>& val = data.split().validation;
        if (val.empty()) return json::object();
        const LCNetEvaluation e = evaluate_lcnet(model, data, val, config.images_per_sample,
                                                 derive_seed(config.seed, {kValidationStream}));
        return {{"validation_direction_mae_degrees", e.direction_mae_degrees},
                {"validation_intensity_re", e.intensity_re},
                {"validation_azimuth_accuracy", e.azimuth_accuracy}};
      });
  return finish(make_checkpoint(model, loop.optimizer, config.epochs, config.seed), loop);
}

Checkpoint train_psfcn_dagger(const PSFCNConfig& model_config, const TrainConfig& config, const LCNetModel& lcnet,
                              const SampleSource& data) {
  check_psfcn_data(model_config, config, data);
  if (!model_config.needs_lights()) throw ConfigError("train: PS-FCN on estimated lights needs a lit input mode");
  lcnet.config.validate();
  PSFCNConfig cfg = model_config;
  cfg.train_image_count = config.images_per_sample;
  PSFCNModel model = build_psfcn<float>(cfg, config.seed);
  AugmentOptions noise_only;
  noise_only.noise = config.augment.noise;
  noise_only.noise_amplitude = config.augment.noise_amplitude;
  noise_only.rescale = false;
  noise_only.crop = false;
  AugmentOptions geometry = config.augment;
  geometry.noise = false;
  Loop loop{config, data, model.parameters(), {}, {}};
  loop.run(
      [&](int index, int epoch) {
        const std::uint64_t e = static_cast<std::uint64_t>(epoch), i = static_cast<std::uint64_t>(index);
        RenderedSample sample;
        load_lights(data, index, config.images_per_sample, derive_seed(config.seed, {kLightStream, e, i}), sample);
        const TrainingInstance noisy = augment(sample, noise_only, derive_seed(config.seed, {kNoiseStream, e, i}));
        sample.images = noisy.images;
        sample.lights = estimate_lights(lcnet, sample);
        const TrainingInstance inst = augment(sample, geometry, derive_seed(config.seed, {kAugmentStream, e, i}));
        return psfcn_sample_loss(model, inst);
      },
      [&] {
        return psfcn_validation(model, config, data,
                                [&](const RenderedSample& s, int) { return estimate_lights(lcnet, s); });
      });
  return finish(make_checkpoint(model, loop.optimizer, config.epochs, config.seed), loop);
}

}  // namespace psnet
