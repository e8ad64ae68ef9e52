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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "psnet/errors.h"
#include "psnet/io.h"
#include "psnet/training.h"

using namespace psnet;
namespace fs = std::filesystem;

namespace {

DatasetSpec small_spec(int count = 12, int resolution = 32) {
  DatasetSpec spec;
  spec.sample_count = count;
  spec.resolution = resolution;
  spec.validation_fraction = 0.1;
  return spec;
}

PSFCNConfig small_psfcn() {
  PSFCNConfig cfg;
  cfg.extractor_channels = {8, 8, 8, 8, 8, 8, 8};
  cfg.regression_channels = {8, 8, 8};
  return cfg;
}

LCNetConfig small_lcnet(int size) {
  LCNetConfig cfg;
  cfg.input_size = size;
  cfg.conv_channels = {8, 8, 8, 8, 8, 8};
  cfg.fc_channels = {16, 16};
  return cfg;
}

TrainConfig quick_train(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 2;
  cfg.images_per_sample = 4;
  cfg.seed = 5;
  cfg.augment.max_size = 40;
  return cfg;
}

bool same_values(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

bool same_parameters(const Checkpoint& a, const Checkpoint& b) {
  if (a.parameters.size() != b.parameters.size()) return false;
  for (std::size_t i = 0; i < a.parameters.size(); ++i) {
    if (a.parameters[i].name != b.parameters[i].name) return false;
    if (!same_values(a.parameters[i].tensor, b.parameters[i].tensor)) return false;
  }
  return true;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("psnet_training_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

AugmentOptions nothing() {
  AugmentOptions o;
  o.noise = false;
  o.rescale = false;
  o.crop = false;
  o.intensity_scaling = false;
  return o;
}

}  // namespace

TEST_CASE("learning rate halves every five epochs") {
  CHECK(learning_rate(0.0005, 5) == 0.00025);
  CHECK(learning_rate(0.001, 0) == 0.001);
  for (int t = 0; t < 30; ++t) {
    CHECK(learning_rate(0.001, t) == 0.001 / std::pow(2.0, std::floor(t / 5.0)));
  }
  CHECK_THROWS_AS(learning_rate(0.001, 1, 0), UsageError);
}

TEST_CASE("choose_lights draws distinct sorted indices") {
  const std::vector<int> a = choose_lights(64, 16, 3);
  CHECK(a.size() == 16);
  CHECK(std::set<int>(a.begin(), a.end()).size() == 16);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(a.front() >= 0);
  CHECK(a.back() < 64);
  CHECK(choose_lights(64, 16, 3) == a);
  CHECK(choose_lights(64, 16, 4) != a);
  CHECK(choose_lights(5, 5, 0) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(choose_lights(4, 5, 0), UsageError);
}

TEST_CASE("augment: disabled augmentation returns the source crop") {
  ProceduralSource data(small_spec(2, 64), 1);
  const RenderedSample s = data.load(0, {0, 1, 2});
  AugmentOptions o = nothing();
  o.crop = true;
  const TrainingInstance inst = augment(s, o, 9);
  REQUIRE(inst.images.shape() == Shape{3, 3, 32, 32});
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
          const float got = inst.images[((i * 3 + c) * 32 + y) * 32 + x];
          const float want = s.images[((i * 3 + c) * 64 + inst.crop_top + y) * 64 + inst.crop_left + x];
          REQUIRE(got == want);
        }
      }
    }
  }
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const std::size_t src = static_cast<std::size_t>(inst.crop_top + y) * 64 + inst.crop_left + x;
      REQUIRE(inst.normals.normals[y * 32 + x] == s.normal_map.normals[src]);
      REQUIRE(inst.normals.mask[y * 32 + x] == s.normal_map.mask[src]);
    }
  }
  for (std::size_t i = 0; i < s.lights.size(); ++i) CHECK(inst.lights[i].intensity == s.lights[i].intensity);

  const TrainingInstance whole = augment(s, nothing(), 9);
  CHECK(same_values(whole.images, s.images));
}

TEST_CASE("augment: full pipeline properties") {
  DatasetSpec spec = small_spec(4, 128);
  ProceduralSource data(spec, 2);
  AugmentOptions o;
  for (int k = 0; k < 4; ++k) {
    const RenderedSample s = data.load(k, choose_lights(64, 4, k));
    const TrainingInstance inst = augment(s, o, 100 + k);
    CHECK(inst.images.shape() == Shape{4, 3, 32, 32});
    CHECK(inst.normals.height == 32);
    CHECK(inst.normals.width == 32);
    for (std::size_t p = 0; p < inst.normals.pixel_count(); ++p) {
      if (inst.normals.mask[p]) REQUIRE(std::abs(inst.normals.normals[p].norm() - 1) < 1e-12);
    }
    CHECK(inst.normals.foreground_count() >= 512);
    const TrainingInstance again = augment(s, o, 100 + k);
    CHECK(same_values(inst.images, again.images));
  }
}

TEST_CASE("augment: noise stays within its amplitude") {
  ProceduralSource data(small_spec(1, 64), 3);
  const RenderedSample s = data.load(0, {4, 5});
  AugmentOptions o = nothing();
  o.noise = true;
  const TrainingInstance inst = augment(s, o, 7);
  double largest = 0;
  for (std::size_t i = 0; i < s.images.numel(); ++i) {
    largest = std::max(largest, std::abs(double(inst.images[i]) - double(s.images[i])));
  }
  CHECK(largest <= 0.025 + 1e-6);
  CHECK(largest > 0.02);
}

TEST_CASE("augment: rescale stays in range and intensity scaling is consistent") {
  ProceduralSource data(small_spec(1, 64), 3);
  const RenderedSample s = data.load(0, {1, 2, 3});
  AugmentOptions o = nothing();
  o.rescale = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TrainingInstance inst = augment(s, o, seed);
    CHECK(inst.images.dim(2) >= 32);
    CHECK(inst.images.dim(2) <= 128);
    CHECK(inst.images.dim(3) >= 32);
    CHECK(inst.images.dim(3) <= 128);
    CHECK(inst.normals.height == inst.images.dim(2));
    CHECK(inst.normals.width == inst.images.dim(3));
  }

  AugmentOptions scaling = nothing();
  scaling.intensity_scaling = true;
  const TrainingInstance inst = augment(s, scaling, 11);
  const std::size_t frame = s.images.numel() / 3;
  for (int i = 0; i < 3; ++i) {
    const double e = inst.lights[i].intensity;
    CHECK(e >= 0.2);
    CHECK(e <= 2.0);
    const float factor = static_cast<float>(e / s.lights[i].intensity);
    for (std::size_t j = 0; j < frame; ++j) REQUIRE(inst.images[i * frame + j] == s.images[i * frame + j] * factor);
  }
}

TEST_CASE("augment: rejects samples smaller than the crop") {
  ProceduralSource data(small_spec(1, 16), 3);
  AugmentOptions o = nothing();
  o.crop = true;
  CHECK_THROWS_AS(augment(data.load(0, {0}), o, 0), UsageError);
}

TEST_CASE("resize_bilinear keeps constants and identity") {
  Tensor c = Tensor::full({2, 5, 7}, 0.75f);
  const Tensor r = resize_bilinear(c, 9, 3);
  CHECK(r.shape() == Shape{2, 9, 3});
  for (float v : r.values()) CHECK(v == doctest::Approx(0.75));
  Tensor ramp({1, 4, 4});
  for (int i = 0; i < 16; ++i) ramp[i] = static_cast<float>(i);
  CHECK(same_values(resize_bilinear(ramp, 4, 4), ramp));
}

TEST_CASE("dataset: 64 pairs per sample, 1% split, determinism") {
  DatasetSpec spec;
  spec.sample_count = 200;
  spec.resolution = 16;
  ProceduralSource data(spec, 8);
  const RenderedSample s = data.load(3);
  CHECK(s.images.dim(0) == 64);
  CHECK(s.lights.size() == 64);
  const std::size_t n_val = data.split().validation.size();
  CHECK(n_val >= 1);
  CHECK(n_val <= 3);
  CHECK(data.split().train.size() + n_val == 200);
  std::set<int> all(data.split().train.begin(), data.split().train.end());
  all.insert(data.split().validation.begin(), data.split().validation.end());
  CHECK(all.size() == 200);

  ProceduralSource twin(spec, 8);
  CHECK(same_values(twin.load(3).images, s.images));
  CHECK(twin.split().validation == data.split().validation);
}

TEST_CASE("dataset: generated directory matches the procedural source") {
  const fs::path dir = scratch("dataset");
  DatasetSpec spec = small_spec(3, 16);
  spec.lights_per_sample = 8;
  spec.materials = {MaterialKind::kLambertian, MaterialKind::kBlinnPhong, MaterialKind::kBlend};
  generate_dataset(spec, 4, dir.string());
  DiskSource disk(dir.string());
  ProceduralSource proc(spec, 4);
  REQUIRE(disk.size() == 3);
  CHECK(disk.resolution() == 16);
  CHECK(disk.split().validation == proc.split().validation);
  for (int i = 0; i < 3; ++i) {
    const RenderedSample a = disk.load(i, {1, 6});
    const RenderedSample b = proc.load(i, {1, 6});
    CHECK(same_values(a.images, b.images));
    CHECK(same_values(a.normal_map.to_tensor(), b.normal_map.to_tensor()));
    for (int k = 0; k < 2; ++k) {
      CHECK((a.lights[k].direction - b.lights[k].direction).norm() < 1e-12);
      CHECK(a.lights[k].intensity == doctest::Approx(b.lights[k].intensity).epsilon(1e-12));
    }
  }

  const fs::path again = scratch("dataset_again");
  generate_dataset(spec, 4, again.string());
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path twin = again / fs::relative(entry.path(), dir);
    REQUIRE(read_file(entry.path().string()) == read_file(twin.string()));
  }
}

TEST_CASE("train_psfcn: loss decreases, logs, deterministic") {
  ProceduralSource data(small_spec(12, 32), 6);
  const fs::path dir = scratch("psfcn");
  TrainConfig cfg = quick_train(4);
  cfg.log_path = (dir / "train_log.jsonl").string();
  const Checkpoint a = train_psfcn(small_psfcn(), cfg, data);
  REQUIRE(a.history.size() == 4);
  CHECK(a.history.back().train_loss < a.history.front().train_loss);
  CHECK(a.history[1].learning_rate == cfg.initial_lr);
  CHECK(a.history.front().validation.contains("validation_mae_degrees"));

  std::ifstream log(cfg.log_path);
  std::string line;
  int rows = 0;
  while (std::getline(log, line)) {
    const auto row = nlohmann::json::parse(line);
    CHECK(row.contains("loss"));
    CHECK(row.contains("lr"));
    CHECK(row.contains("wall_seconds"));
    CHECK(row.contains("validation_mae_degrees"));
    ++rows;
  }
  CHECK(rows == 4);

  TrainConfig quiet = cfg;
  quiet.log_path.clear();
  const Checkpoint b = train_psfcn(small_psfcn(), quiet, data);
  CHECK(same_parameters(a, b));
  CHECK(a.optimizer.step_count == b.optimizer.step_count);
}

TEST_CASE("train_psfcn: configuration errors") {
  ProceduralSource data(small_spec(4, 32), 6);
  TrainConfig cfg = quick_train(1);
  cfg.augment.crop_size = 30;
  CHECK_THROWS_AS(train_psfcn(small_psfcn(), cfg, data), ConfigError);
  cfg = quick_train(1);
  cfg.images_per_sample = 65;
  CHECK_THROWS_AS(train_psfcn(small_psfcn(), cfg, data), ConfigError);
  cfg = quick_train(1);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train_psfcn(small_psfcn(), cfg, data), ConfigError);
}

TEST_CASE("checkpoint round trip reproduces forward outputs bit-identically") {
  ProceduralSource data(small_spec(6, 32), 7);
  const Checkpoint trained = train_psfcn(small_psfcn(), quick_train(1), data);
  const fs::path dir = scratch("checkpoint");
  const std::string path = (dir / "psfcn.nfck").string();
  save_checkpoint(path, trained);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.kind == "psfcn");
  CHECK(loaded.epoch == trained.epoch);
  CHECK(loaded.seed == trained.seed);
  CHECK(loaded.config == trained.config);
  CHECK(loaded.history.size() == trained.history.size());
  CHECK(same_parameters(loaded, trained));
  CHECK(loaded.optimizer.step_count == trained.optimizer.step_count);
  CHECK(loaded.optimizer.first_moment == trained.optimizer.first_moment);
  CHECK(loaded.optimizer.second_moment == trained.optimizer.second_moment);

  const PSFCNModel a = psfcn_from_checkpoint(trained);
  const PSFCNModel b = psfcn_from_checkpoint(loaded);
  const RenderedSample s = data.load(0, {0, 1, 2, 3});
  const NormalMap na = psfcn_forward(a, s.images, s.lights);
  const NormalMap nb = psfcn_forward(b, s.images, s.lights);
  CHECK(same_values(na.to_tensor(), nb.to_tensor()));

  CHECK_THROWS_AS(lcnet_from_checkpoint(loaded), ConfigError);
  Checkpoint broken = loaded;
  broken.parameters.pop_back();
  CHECK_THROWS_AS(psfcn_from_checkpoint(broken), ConfigError);
}

TEST_CASE("train_lcnet: resolution contract, determinism, checkpoint") {
  ProceduralSource wrong(small_spec(4, 32), 1);
  CHECK_THROWS_AS(train_lcnet(small_lcnet(64), quick_train(1), wrong), ConfigError);

  ProceduralSource data(small_spec(6, 64), 1);
  TrainConfig cfg = quick_train(2);
  cfg.augment.intensity_scaling = true;
  cfg.initial_lr = 5e-4;
  const Checkpoint a = train_lcnet(small_lcnet(64), cfg, data);
  const Checkpoint b = train_lcnet(small_lcnet(64), cfg, data);
  CHECK(same_parameters(a, b));
  CHECK(a.kind == "lcnet");
  CHECK(a.history.back().validation.contains("validation_direction_mae_degrees"));
  const LCNetModel model = lcnet_from_checkpoint(from_checkpoint_file(decode_checkpoint(
      encode_checkpoint(to_checkpoint_file(a)))));
  const LCNetModel direct = lcnet_from_checkpoint(a);
  const RenderedSample s = data.load(1, {0, 1, 2});
  const LCNetPrediction pa = lcnet_forward(model, s.images, s.normal_map.mask);
  const LCNetPrediction pb = lcnet_forward(direct, s.images, s.normal_map.mask);
  for (int i = 0; i < 3; ++i) {
    CHECK(pa.lights[i].direction == pb.lights[i].direction);
    CHECK(pa.lights[i].intensity == pb.lights[i].intensity);
  }
  CHECK_THROWS_AS(psfcn_from_checkpoint(a), ConfigError);

  LCNetConfig regression = small_lcnet(64);
  regression.head_mode = LCNetHeadMode::kRegression;
  const Checkpoint r = train_lcnet(regression, quick_train(1), data);
  CHECK(std::isfinite(r.history.back().train_loss));
}

TEST_CASE("train_lcnet: azimuth accuracy beats chance after one epoch") {
  DatasetSpec spec = small_spec(100, 32);
  spec.shapes = {ShapeKind::kSphere};
  spec.materials = {MaterialKind::kLambertian};
  ProceduralSource data(spec, 12);
  LCNetConfig model;
  model.input_size = 32;
  TrainConfig cfg = quick_train(1);
  cfg.batch_size = 4;
  cfg.images_per_sample = 16;
  const Checkpoint c = train_lcnet(model, cfg, data);
  DatasetSpec held = spec;
  held.sample_count = 20;
  ProceduralSource test(held, 99);
  std::vector<int> all(20);
  for (int i = 0; i < 20; ++i) all[i] = i;
  const LCNetEvaluation e = evaluate_lcnet(lcnet_from_checkpoint(c), test, all, 16, 3);
  CHECK(e.azimuth_accuracy > 1.0 / model.grid.direction_bins);
}

TEST_CASE("train_psfcn_dagger keeps LCNet frozen") {
  ProceduralSource lc_data(small_spec(6, 32), 2);
  const LCNetModel lcnet = lcnet_from_checkpoint(train_lcnet(small_lcnet(32), quick_train(1), lc_data));
  std::vector<Tensor> before;
  for (const auto& p : lcnet.parameters()) before.push_back(p.clone());

  ProceduralSource data(small_spec(6, 64), 3);
  const Checkpoint c = train_psfcn_dagger(small_psfcn(), quick_train(2), lcnet, data);
  CHECK(c.kind == "psfcn");
  CHECK(c.history.size() == 2);
  const auto after = lcnet.parameters();
  REQUIRE(after.size() == before.size());
  for (std::size_t i = 0; i < after.size(); ++i) {
    CHECK(same_values(after[i], before[i]));
    CHECK_FALSE(after[i].has_grad());
  }

  // End to end from images and mask alone.
  const RenderedSample s = data.load(0, {0, 1, 2, 3});
  RenderedSample unlit = s;
  unlit.lights.assign(4, DirectionalLight{});
  const std::vector<DirectionalLight> est = estimate_lights(lcnet, unlit);
  const NormalMap n = psfcn_forward(psfcn_from_checkpoint(c), s.images, est, s.normal_map.mask);
  CHECK(n.foreground_count() == s.normal_map.foreground_count());
}

TEST_CASE("train config JSON round trip") {
  TrainConfig cfg = quick_train(3);
  cfg.augment.intensity_scaling = true;
  const TrainConfig back = train_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK_THROWS_AS(train_config_from_json({{"epochs", 0}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json({{"epochs", "many"}}), ConfigError);
  PSFCNConfig p = small_psfcn();
  p.input_mode = PSFCNInputMode::kNormalized;
  CHECK(to_json(psfcn_config_from_json(to_json(p))) == to_json(p));
  LCNetConfig l = small_lcnet(64);
  l.head_mode = LCNetHeadMode::kRegression;
  CHECK(to_json(lcnet_config_from_json(to_json(l))) == to_json(l));
}
