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


#include <map>

#include "psnet/errors.h"
#include "psnet/training.h"

namespace psnet {
namespace {

using nlohmann::json;

template <typename Layer>
void name_layers(const std::string& prefix, const std::vector<Layer>& layers, std::vector<NamedTensor>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.push_back({prefix + "." + std::to_string(i) + ".weight", layers[i].weight});
    out.push_back({prefix + "." + std::to_string(i) + ".bias", layers[i].bias});
  }
}

std::vector<NamedTensor> named_parameters(const PSFCNModel& model) {
  std::vector<NamedTensor> out;
  name_layers("extractor", model.extractor, out);
  name_layers("regressor", model.regressor, out);
  return out;
}

std::vector<NamedTensor> named_parameters(const LCNetModel& model) {
  std::vector<NamedTensor> out;
  name_layers("extractor", model.extractor, out);
  name_layers("hidden", model.hidden, out);
  name_layers("heads", model.heads, out);
  return out;
}

std::vector<NamedTensor> snapshot(const std::vector<NamedTensor>& params) {
  std::vector<NamedTensor> out;
  for (const auto& p : params) out.push_back({p.name, p.tensor.detach().clone()});
  return out;
}

// Copies stored values into freshly built parameters, matched by name.
void restore(const std::vector<NamedTensor>& stored, const std::vector<NamedTensor>& targets) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& s : stored) by_name[s.name] = &s.tensor;
  if (by_name.size() != targets.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(by_name.size()) + " parameters, model expects " +
                      std::to_string(targets.size()));
  }
  for (const auto& t : targets) {
    auto it = by_name.find(t.name);
    if (it == by_name.end()) throw ConfigError("checkpoint is missing parameter " + t.name);
    if (it->second->shape() != t.tensor.shape()) {
      throw ConfigError("checkpoint parameter " + t.name + " has shape " + shape_string(it->second->shape()) +
                        ", model expects " + shape_string(t.tensor.shape()));
    }
    auto src = it->second->values();
    Tensor dst = t.tensor;
    std::copy(src.begin(), src.end(), dst.values().begin());
  }
}

template <typename Model>
Checkpoint make(const std::string& kind, json config, const Model& model, const AdamState<float>& optimizer, int epoch,
                std::uint64_t seed) {
  Checkpoint c;
  c.kind = kind;
  c.config = std::move(config);
  c.parameters = snapshot(named_parameters(model));
  c.optimizer = optimizer;
  c.epoch = epoch;
  c.seed = seed;
  return c;
}

json log_to_json(const EpochLog& log) {
  return {{"epoch", log.epoch},
          {"loss", log.train_loss},
          {"lr", log.learning_rate},
          {"wall_seconds", log.wall_seconds},
          {"validation", log.validation}};
}

EpochLog log_from_json(const json& j) {
  EpochLog log;
  log.epoch = j.at("epoch").get<int>();
  log.train_loss = j.at("loss").get<double>();
  log.learning_rate = j.at("lr").get<double>();
  log.wall_seconds = j.at("wall_seconds").get<double>();
  log.validation = j.value("validation", json::object());
  return log;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be at least 1");
  if (!(initial_lr > 0)) throw ConfigError("train: learning rate must be positive");
  if (lr_halving_period < 1) throw ConfigError("train: lr halving period must be at least 1");
  if (images_per_sample < 1 || images_per_sample > 64) {
    throw ConfigError("train: images per sample must be in [1, 64]");
  }
  if (max_samples_per_epoch < 0) throw ConfigError("train: max samples per epoch must be non-negative");
}

json to_json(const TrainConfig& c) {
  const AugmentOptions& a = c.augment;
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"initial_lr", c.initial_lr},
          {"lr_halving_period", c.lr_halving_period},
          {"images_per_sample", c.images_per_sample},
          {"seed", c.seed},
          {"max_samples_per_epoch", c.max_samples_per_epoch},
          {"augment",
           {{"noise", a.noise},
            {"noise_amplitude", a.noise_amplitude},
            {"rescale", a.rescale},
            {"min_size", a.min_size},
            {"max_size", a.max_size},
            {"crop", a.crop},
            {"crop_size", a.crop_size},
            {"min_foreground", a.min_foreground},
            {"intensity_scaling", a.intensity_scaling},
            {"intensity_min", a.intensity_min},
            {"intensity_max", a.intensity_max}}}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  try {
    c.epochs = get_or(j, "epochs", c.epochs);
    c.batch_size = get_or(j, "batch_size", c.batch_size);
    c.initial_lr = get_or(j, "initial_lr", c.initial_lr);
    c.lr_halving_period = get_or(j, "lr_halving_period", c.lr_halving_period);
    c.images_per_sample = get_or(j, "images_per_sample", c.images_per_sample);
    c.seed = get_or(j, "seed", c.seed);
    c.max_samples_per_epoch = get_or(j, "max_samples_per_epoch", c.max_samples_per_epoch);
    c.log_path = get_or(j, "log_path", c.log_path);
    if (j.contains("augment")) {
      const json& a = j.at("augment");
      AugmentOptions& o = c.augment;
      o.noise = get_or(a, "noise", o.noise);
      o.noise_amplitude = get_or(a, "noise_amplitude", o.noise_amplitude);
      o.rescale = get_or(a, "rescale", o.rescale);
      o.min_size = get_or(a, "min_size", o.min_size);
      o.max_size = get_or(a, "max_size", o.max_size);
      o.crop = get_or(a, "crop", o.crop);
      o.crop_size = get_or(a, "crop_size", o.crop_size);
      o.min_foreground = get_or(a, "min_foreground", o.min_foreground);
      o.intensity_scaling = get_or(a, "intensity_scaling", o.intensity_scaling);
      o.intensity_min = get_or(a, "intensity_min", o.intensity_min);
      o.intensity_max = get_or(a, "intensity_max", o.intensity_max);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const PSFCNConfig& c) {
  return {{"width_multiplier", c.width_multiplier},
          {"input_mode", to_string(c.input_mode)},
          {"extractor_channels", c.extractor_channels},
          {"regression_channels", c.regression_channels},
          {"train_image_count", c.train_image_count},
          {"leaky_slope", c.leaky_slope}};
}

PSFCNConfig psfcn_config_from_json(const json& j) {
  PSFCNConfig c;
  try {
    c.width_multiplier = get_or(j, "width_multiplier", c.width_multiplier);
    if (j.contains("input_mode")) c.input_mode = psfcn_input_mode_from_string(j.at("input_mode").get<std::string>());
    c.extractor_channels = get_or(j, "extractor_channels", c.extractor_channels);
    c.regression_channels = get_or(j, "regression_channels", c.regression_channels);
    c.train_image_count = get_or(j, "train_image_count", c.train_image_count);
    c.leaky_slope = get_or(j, "leaky_slope", c.leaky_slope);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("PS-FCN config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const LCNetConfig& c) {
  return {{"grid",
           {{"direction_bins", c.grid.direction_bins},
            {"intensity_bins", c.grid.intensity_bins},
            {"min_intensity", c.grid.min_intensity},
            {"max_intensity", c.grid.max_intensity}}},
          {"width_multiplier", c.width_multiplier},
          {"input_size", c.input_size},
          {"head_mode", to_string(c.head_mode)},
          {"conv_channels", c.conv_channels},
          {"fc_channels", c.fc_channels},
          {"leaky_slope", c.leaky_slope}};
}

LCNetConfig lcnet_config_from_json(const json& j) {
  LCNetConfig c;
  try {
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      c.grid.direction_bins = get_or(g, "direction_bins", c.grid.direction_bins);
      c.grid.intensity_bins = get_or(g, "intensity_bins", c.grid.intensity_bins);
      c.grid.min_intensity = get_or(g, "min_intensity", c.grid.min_intensity);
      c.grid.max_intensity = get_or(g, "max_intensity", c.grid.max_intensity);
    }
    c.width_multiplier = get_or(j, "width_multiplier", c.width_multiplier);
    c.input_size = get_or(j, "input_size", c.input_size);
    if (j.contains("head_mode")) c.head_mode = lcnet_head_mode_from_string(j.at("head_mode").get<std::string>());
    c.conv_channels = get_or(j, "conv_channels", c.conv_channels);
    c.fc_channels = get_or(j, "fc_channels", c.fc_channels);
    c.leaky_slope = get_or(j, "leaky_slope", c.leaky_slope);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("LCNet config: ") + e.what());
  }
  c.validate();
  return c;
}

Checkpoint make_checkpoint(const PSFCNModel& model, const AdamState<float>& optimizer, int epoch, std::uint64_t seed) {
  return make("psfcn", to_json(model.config), model, optimizer, epoch, seed);
}

Checkpoint make_checkpoint(const LCNetModel& model, const AdamState<float>& optimizer, int epoch, std::uint64_t seed) {
  return make("lcnet", to_json(model.config), model, optimizer, epoch, seed);
}

PSFCNModel psfcn_from_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.kind != "psfcn") throw ConfigError("expected a psfcn checkpoint, got '" + checkpoint.kind + "'");
  PSFCNModel model = build_psfcn<float>(psfcn_config_from_json(checkpoint.config), 0);
  restore(checkpoint.parameters, named_parameters(model));
  return model;
}

LCNetModel lcnet_from_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.kind != "lcnet") throw ConfigError("expected an lcnet checkpoint, got '" + checkpoint.kind + "'");
  LCNetModel model = build_lcnet<float>(lcnet_config_from_json(checkpoint.config), 0);
  restore(checkpoint.parameters, named_parameters(model));
  return model;
}

CheckpointFile to_checkpoint_file(const Checkpoint& c) {
  CheckpointFile f;
  f.kind = c.kind;
  json history = json::array();
  for (const auto& h : c.history) history.push_back(log_to_json(h));
  const AdamState<float>& a = c.optimizer;
  f.meta = {{"config", c.config},
            {"epoch", c.epoch},
            {"seed", c.seed},
            {"history", history},
            {"optimizer",
             {{"step_count", a.step_count},
              {"beta1", a.beta1},
              {"beta2", a.beta2},
              {"epsilon", a.epsilon},
              {"has_moments", !a.first_moment.empty()}}}};
  f.tensors = c.parameters;
  if (!a.first_moment.empty()) {
    if (a.first_moment.size() != c.parameters.size()) {
      throw UsageError("checkpoint: optimizer state does not match the parameter list");
    }
    for (std::size_t i = 0; i < c.parameters.size(); ++i) {
      const Shape& shape = c.parameters[i].tensor.shape();
      f.tensors.push_back({"adam.m." + c.parameters[i].name, Tensor(shape, a.first_moment[i])});
      f.tensors.push_back({"adam.v." + c.parameters[i].name, Tensor(shape, a.second_moment[i])});
    }
  }
  return f;
}

Checkpoint from_checkpoint_file(const CheckpointFile& f) {
  Checkpoint c;
  c.kind = f.kind;
  try {
    const json& m = f.meta;
    c.config = m.at("config");
    c.epoch = m.at("epoch").get<int>();
    c.seed = m.at("seed").get<std::uint64_t>();
    for (const auto& h : m.at("history")) c.history.push_back(log_from_json(h));
    const json& o = m.at("optimizer");
    c.optimizer.step_count = o.at("step_count").get<std::int64_t>();
    c.optimizer.beta1 = o.at("beta1").get<double>();
    c.optimizer.beta2 = o.at("beta2").get<double>();
    c.optimizer.epsilon = o.at("epsilon").get<double>();
    const bool has_moments = o.at("has_moments").get<bool>();
    std::map<std::string, const Tensor*> moments;
    for (const auto& t : f.tensors) {
      if (t.name.rfind("adam.", 0) == 0) {
        moments[t.name] = &t.tensor;
      } else {
        c.parameters.push_back(t);
      }
    }
    if (has_moments) {
      for (const auto& p : c.parameters) {
        auto m1 = moments.find("adam.m." + p.name);
        auto m2 = moments.find("adam.v." + p.name);
        if (m1 == moments.end() || m2 == moments.end()) throw DataError("checkpoint: missing optimizer state");
        auto v1 = m1->second->values();
        auto v2 = m2->second->values();
        c.optimizer.first_moment.emplace_back(v1.begin(), v1.end());
        c.optimizer.second_moment.emplace_back(v2.begin(), v2.end());
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  write_checkpoint_file(path, to_checkpoint_file(checkpoint));
}

Checkpoint load_checkpoint(const std::string& path) { return from_checkpoint_file(read_checkpoint_file(path)); }

}  // namespace psnet
