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


#include "psnet/cli.h"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "psnet/classic_ps.h"
#include "psnet/errors.h"
#include "psnet/io.h"
#include "psnet/lighting_grid.h"
#include "psnet/metrics.h"
#include "psnet/training.h"

namespace psnet {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

// Image stacks are the img_*.pfm files of a directory in name order.
Tensor read_image_stack(const std::string& directory) {
  std::vector<fs::path> files;
  if (!fs::is_directory(directory)) throw DataError(directory + ": not a directory");
  for (const auto& entry : fs::directory_iterator(directory)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("img_", 0) == 0 && entry.path().extension() == ".pfm") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw DataError(directory + ": no img_*.pfm files");
  std::sort(files.begin(), files.end());
  Tensor stack;
  std::size_t frame = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Tensor image = read_pfm(files[i].string());
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    if (i == 0) {
      stack = Tensor({static_cast<int>(files.size()), 3, h, w});
      frame = static_cast<std::size_t>(3) * h * w;
    } else if (h != stack.dim(2) || w != stack.dim(3)) {
      throw DataError(files[i].string() + ": size differs from " + files[0].string());
    }
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int k = 0; k < 3; ++k) {
      const int src = c == 1 ? 0 : k;
      std::copy_n(image.values().begin() + src * plane, plane, stack.values().begin() + i * frame + k * plane);
    }
  }
  return stack;
}

std::vector<std::uint8_t> read_mask(const std::string& path, int h, int w) {
  const Tensor m = read_pfm(path);
  if (m.dim(0) != 1 || m.dim(1) != h || m.dim(2) != w) throw DataError(path + ": mask size does not match images");
  std::vector<std::uint8_t> mask(m.numel());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = m[i] > 0.5f ? 1 : 0;
  return mask;
}

std::string companion_mask(const std::string& normal_path) {
  const fs::path p(normal_path);
  const fs::path own = p.parent_path() / (p.stem().string() + "_mask.pfm");
  if (fs::exists(own)) return own.string();
  const fs::path shared = p.parent_path() / "mask.pfm";
  if (fs::exists(shared)) return shared.string();
  return "";
}

DatasetSpec load_spec(const std::string& path, std::uint64_t& seed, bool seed_given) {
  const json j = read_json(path);
  if (!seed_given && j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  const json spec = j.contains("dataset") ? j.at("dataset") : j;
  return dataset_spec_from_json(spec);
}

struct DataOptions {
  std::string data_dir;
  std::string config;
  std::uint64_t seed = 0;
};

std::unique_ptr<SampleSource> open_data(const DataOptions& o, bool seed_given) {
  if (!o.data_dir.empty() && !o.config.empty()) throw UsageError("use either --data or --dataset-config");
  if (!o.data_dir.empty()) return std::make_unique<DiskSource>(o.data_dir);
  if (o.config.empty()) throw UsageError("one of --data or --dataset-config is required");
  std::uint64_t seed = o.seed;
  const DatasetSpec spec = load_spec(o.config, seed, seed_given);
  return std::make_unique<ProceduralSource>(spec, seed);
}

struct TrainOptions {
  DataOptions data;
  std::string model_config;
  std::string train_config;
  std::string out;
  std::string log;
  int epochs = 0;
  int batch_size = 0;
  double lr = 0;
  int images = 0;
  std::string lcnet;
};

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--data", o.data.data_dir, "Dataset directory written by `render`");
  cmd->add_option("--dataset-config", o.data.config, "Dataset spec JSON rendered on the fly");
  cmd->add_option("--model", o.model_config, "Model configuration JSON");
  cmd->add_option("--train-config", o.train_config, "Training configuration JSON");
  cmd->add_option("--out", o.out, "Checkpoint path")->required();
  cmd->add_option("--log", o.log, "Per-epoch log (default: train_log.jsonl next to the checkpoint)");
  cmd->add_option("--epochs", o.epochs, "Override epochs");
  cmd->add_option("--batch-size", o.batch_size, "Override batch size");
  cmd->add_option("--lr", o.lr, "Override initial learning rate");
  cmd->add_option("--images-per-sample", o.images, "Override images per sample");
  cmd->add_option("--seed", o.data.seed, "Seed for training and procedural data");
}

TrainConfig build_train_config(const TrainOptions& o, bool seed_given, double default_lr) {
  TrainConfig defaults;
  defaults.initial_lr = default_lr;
  TrainConfig c = o.train_config.empty() ? defaults : train_config_from_json(read_json(o.train_config), defaults);
  if (o.epochs) c.epochs = o.epochs;
  if (o.batch_size) c.batch_size = o.batch_size;
  if (o.lr > 0) c.initial_lr = o.lr;
  if (o.images) c.images_per_sample = o.images;
  if (seed_given) c.seed = o.data.seed;
  c.log_path = !o.log.empty() ? o.log : (fs::path(o.out).parent_path() / "train_log.jsonl").string();
  c.validate();
  return c;
}

void print_epoch(std::ostream& out, const EpochLog& log) {
  out << "epoch " << log.epoch << " loss " << log.train_loss << " lr " << log.learning_rate;
  for (auto it = log.validation.begin(); it != log.validation.end(); ++it) out << " " << it.key() << " " << it.value();
  out << "\n";
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

std::vector<Check> run_selftest() {
  std::vector<Check> checks;
  auto add = [&](std::string name, bool ok, std::string detail) { checks.push_back({name, ok, detail}); };

  {
    const NormalMap sphere = sphere_normal_map(64);
    const auto lights = sample_lights(16, {120, 120, 1, 1}, 1);
    const Tensor64 images = render_stack<double>(sphere, Lambertian{}, lights);
    const L2Solution sol = l2_solve(images, lights, sphere.mask);
    const double mae = mae_normals(sol.normals, sphere).mae_degrees;
    add("least-squares recovery on a Lambertian sphere", mae < 0.1, "MAE " + std::to_string(mae) + " deg");
  }
  {
    const NormalMap sphere = sphere_normal_map(32);
    const std::vector<double> albedo(sphere.pixel_count(), 0.8);
    const auto lights = sample_lights(8, {}, 2);
    auto brdf = [](const std::vector<double>& a) {
      Lambertian l;
      for (double v : a) l.albedo_map.emplace_back(v, v, v);
      return l;
    };
    const Tensor64 ref = render_stack<double>(sphere, brdf(albedo), lights);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5), lam(0.5, 2.0);
    double worst = 0;
    for (int i = 0; i < 5; ++i) {
      const GBRScene t = gbr_transform(sphere, albedo, lights, {u(rng), u(rng), (i % 2 ? -1 : 1) * lam(rng)});
      const Tensor64 other = render_stack<double>(t.normals, brdf(t.albedo), t.lights);
      for (std::size_t k = 0; k < other.numel(); ++k) worst = std::max(worst, std::abs(other[k] - ref[k]));
    }
    add("GBR-transformed scenes render identically", worst < 1e-5, "max difference " + std::to_string(worst));
  }
  {
    const NormalMap sphere = sphere_normal_map(32);
    const auto lights = sample_lights(16, {}, 4);
    const Tensor a = cast<float>(normalize_observations(render_stack<double>(sphere, Lambertian{{0.3, 0.3, 0.3}, {}}, lights)));
    const Tensor b = cast<float>(normalize_observations(render_stack<double>(sphere, Lambertian{{0.9, 0.9, 0.9}, {}}, lights)));
    const bool same = std::equal(a.values().begin(), a.values().end(), b.values().begin());
    add("observation normalization cancels albedo", same, same ? "bit-identical" : "stacks differ");
  }
  {
    PSFCNConfig cfg;
    const PSFCNModel model = build_psfcn<float>(cfg, 5);
    const NormalMap sphere = sphere_normal_map(16);
    auto lights = sample_lights(6, {}, 6);
    const Tensor images = render_stack<float>(sphere, BlinnPhong{}, lights);
    const Tensor base = psfcn_forward(model, images, lights).to_tensor();
    const std::vector<int> order{3, 0, 5, 1, 4, 2};
    const std::size_t frame = images.numel() / 6;
    Tensor shuffled(images.shape());
    std::vector<DirectionalLight> shuffled_lights;
    for (int i = 0; i < 6; ++i) {
      std::copy_n(images.values().begin() + order[i] * frame, frame, shuffled.values().begin() + i * frame);
      shuffled_lights.push_back(lights[order[i]]);
    }
    const Tensor other = psfcn_forward(model, shuffled, shuffled_lights).to_tensor();
    const bool same = std::equal(base.values().begin(), base.values().end(), other.values().begin());
    add("PS-FCN output ignores input order", same, same ? "bit-identical" : "outputs differ");
  }
  {
    const LightingGrid grid;
    const double half = grid.max_deviation_deg() * M_PI / 180;
    double worst = 0, bound = 0;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0, 1);
    for (int i = 0; i < 10000; ++i) {
      Eigen::Vector3d l(g(rng), g(rng), std::abs(g(rng)));
      l.normalize();
      const DirectionBins b = discretize_direction(l, grid);
      const Eigen::Vector3d d = decode_direction(b.azimuth, b.elevation, grid);
      worst = std::max(worst, angle_between_deg(l, d));
    }
    // Angle between a bin middle and a corner of a 5x5 degree cell at the
    // equator, the largest over the grid.
    bound = angle_between_deg(direction_from_angles({90, 0}),
                              direction_from_angles({90 + half * 180 / M_PI, half * 180 / M_PI}));
    add("lighting discretization error bound", worst <= bound + 1e-9,
        "worst " + std::to_string(worst) + " deg, bound " + std::to_string(bound) + " deg");
  }
  {
    const NormalMap sphere = sphere_normal_map(16);
    NormalMap flipped = sphere;
    for (auto& n : flipped.normals) n = -n;
    const double same = mae_normals(sphere, sphere).mae_degrees;
    const double opposite = mae_normals(sphere, flipped).mae_degrees;
    const ScaleInvariantError re = scale_invariant_re({1, 2}, {1, 1});
    const bool ok = same == 0 && std::abs(opposite - 180) < 1e-9 && std::abs(re.scale - 0.6) < 1e-12 &&
                    std::abs(re.relative_error - 0.3) < 1e-12;
    add("metric identities", ok, "MAE(N,N)=" + std::to_string(same) + " MAE(N,-N)=" + std::to_string(opposite));
  }
  {
    Tensor image({3, 5, 7});
    for (std::size_t i = 0; i < image.numel(); ++i) image[i] = static_cast<float>(i) * 0.37f - 3;
    const Tensor back = decode_pfm(encode_pfm(image));
    const auto lights = sample_lights(5, {}, 9);
    const auto parsed = parse_lights(format_lights(lights));
    bool ok = std::equal(image.values().begin(), image.values().end(), back.values().begin());
    for (std::size_t i = 0; i < lights.size(); ++i) {
      ok = ok && (parsed[i].direction - lights[i].direction).norm() < 1e-6 &&
           std::abs(parsed[i].intensity - lights[i].intensity) < 1e-6;
    }
    add("file format round trips", ok, ok ? "lossless" : "mismatch");
  }
  return checks;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"psnet: photometric stereo toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_path, out_path;
  CLI::App* render = app.add_subcommand("render", "Render a dataset from a scene JSON");
  render->add_option("--config", config_path, "Dataset spec JSON")->required();
  render->add_option("--out", out_path, "Output directory")->required();
  render->add_option("--seed", seed, "Render seed (overrides the config)");

  TrainOptions psfcn_opts, lcnet_opts, dagger_opts;
  CLI::App* train_psfcn_cmd = app.add_subcommand("train-psfcn", "Train PS-FCN with ground-truth lights");
  add_train_options(train_psfcn_cmd, psfcn_opts);
  CLI::App* train_lcnet_cmd = app.add_subcommand("train-lcnet", "Train the lighting network");
  add_train_options(train_lcnet_cmd, lcnet_opts);
  CLI::App* dagger_cmd = app.add_subcommand("train-psfcn-dagger", "Train PS-FCN on lights estimated by LCNet");
  add_train_options(dagger_cmd, dagger_opts);
  dagger_cmd->add_option("--lcnet", dagger_opts.lcnet, "Trained LCNet checkpoint");

  std::string checkpoint, images_dir, lights_path, lcnet_path, baseline, mask_path, probe_dir, lights_out;
  CLI::App* predict = app.add_subcommand("predict", "Estimate a normal map");
  predict->add_option("--checkpoint", checkpoint, "PS-FCN checkpoint");
  predict->add_option("--images", images_dir, "Directory of img_*.pfm files")->required();
  predict->add_option("--lights", lights_path, "Lights CSV");
  predict->add_option("--lcnet", lcnet_path, "LCNet checkpoint for uncalibrated input");
  predict->add_option("--baseline", baseline, "Use a classic solver instead of a checkpoint")
      ->check(CLI::IsMember({"l2"}));
  predict->add_option("--mask", mask_path, "Mask PFM (default: mask.pfm in the image directory)");
  predict->add_option("--out", out_path, "Normal map PFM")->required();
  predict->add_option("--probe", probe_dir, "Write fused feature channels to this directory");
  predict->add_option("--lights-out", lights_out, "Write the lights used to this CSV");

  std::string pred, gt, pred_mask, gt_mask, pred_lights, gt_lights, error_map;
  double ceiling = kDefaultErrorCeilingDeg;
  CLI::App* eval = app.add_subcommand("eval", "Compare predictions with ground truth");
  eval->add_option("--pred", pred, "Predicted normal map PFM");
  eval->add_option("--gt", gt, "Ground-truth normal map PFM");
  eval->add_option("--pred-mask", pred_mask, "Mask for the prediction");
  eval->add_option("--gt-mask", gt_mask, "Mask for the ground truth");
  eval->add_option("--pred-lights", pred_lights, "Predicted lights CSV");
  eval->add_option("--gt-lights", gt_lights, "Ground-truth lights CSV");
  eval->add_option("--out", out_path, "Report JSON")->required();
  eval->add_option("--error-map", error_map, "Color error map PFM");
  eval->add_option("--ceiling", ceiling, "Error map saturation in degrees")->check(CLI::PositiveNumber);

  CLI::App* selftest = app.add_subcommand("selftest", "Run the invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (render->parsed()) {
      const bool seed_given = render->count("--seed") > 0;
      const DatasetSpec spec = load_spec(config_path, seed, seed_given);
      generate_dataset(spec, seed, out_path);
      out << "rendered " << spec.sample_count << " samples to " << out_path << "\n";
      return kExitOk;
    }

    auto train = [&](CLI::App* cmd, TrainOptions& o, const std::string& kind) {
      const bool seed_given = cmd->count("--seed") > 0;
      std::unique_ptr<SampleSource> data = open_data(o.data, seed_given);
      const json model = o.model_config.empty() ? json::object() : read_json(o.model_config);
      TrainConfig config = build_train_config(o, seed_given, kind == "lcnet" ? 5e-4 : 1e-3);
      if (kind == "lcnet" && !(o.train_config.size() && read_json(o.train_config).contains("augment"))) {
        config.augment.intensity_scaling = true;
      }
      config.on_epoch = [&](const EpochLog& log) { print_epoch(out, log); };
      ensure_parent(o.out);
      ensure_parent(config.log_path);
      Checkpoint c;
      if (kind == "lcnet") {
        c = train_lcnet(lcnet_config_from_json(model), config, *data);
      } else if (kind == "dagger") {
        if (o.lcnet.empty()) throw UsageError("train-psfcn-dagger needs --lcnet");
        const LCNetModel lcnet = lcnet_from_checkpoint(load_checkpoint(o.lcnet));
        c = train_psfcn_dagger(psfcn_config_from_json(model), config, lcnet, *data);
      } else {
        c = train_psfcn(psfcn_config_from_json(model), config, *data);
      }
      save_checkpoint(o.out, c);
      out << "saved " << o.out << "\n";
      return kExitOk;
    };
    if (train_psfcn_cmd->parsed()) return train(train_psfcn_cmd, psfcn_opts, "psfcn");
    if (train_lcnet_cmd->parsed()) return train(train_lcnet_cmd, lcnet_opts, "lcnet");
    if (dagger_cmd->parsed()) return train(dagger_cmd, dagger_opts, "dagger");

    if (predict->parsed()) {
      if (!lights_path.empty() && !lcnet_path.empty()) throw UsageError("use either --lights or --lcnet");
      if (baseline.empty() && checkpoint.empty()) throw UsageError("predict needs --checkpoint or --baseline");
      if (!baseline.empty() && !checkpoint.empty()) throw UsageError("use either --checkpoint or --baseline");
      std::optional<PSFCNModel> model;
      if (!checkpoint.empty()) model = psfcn_from_checkpoint(load_checkpoint(checkpoint));
      const bool needs_lights = !model || model->config.needs_lights();
      if (needs_lights && lights_path.empty() && lcnet_path.empty()) {
        throw UsageError("this model needs light directions: pass --lights or --lcnet");
      }

      RenderedSample sample;
      sample.images = read_image_stack(images_dir);
      const int q = sample.images.dim(0), h = sample.images.dim(2), w = sample.images.dim(3);
      const std::string mask_file =
          !mask_path.empty() ? mask_path
                             : (fs::exists(fs::path(images_dir) / "mask.pfm") ? (fs::path(images_dir) / "mask.pfm").string()
                                                                              : "");
      sample.normal_map = NormalMap(h, w);
      std::fill(sample.normal_map.mask.begin(), sample.normal_map.mask.end(), 1);
      if (!mask_file.empty()) sample.normal_map.mask = read_mask(mask_file, h, w);

      if (!lights_path.empty()) {
        sample.lights = read_lights(lights_path);
      } else if (!lcnet_path.empty()) {
        sample.lights = estimate_lights(lcnet_from_checkpoint(load_checkpoint(lcnet_path)), sample);
      }
      if (needs_lights && static_cast<int>(sample.lights.size()) != q) {
        throw DataError("found " + std::to_string(q) + " images but " + std::to_string(sample.lights.size()) +
                        " lights");
      }
      if (!lights_out.empty() && !sample.lights.empty()) {
        ensure_parent(lights_out);
        write_lights(lights_out, sample.lights);
      }

      NormalMap result;
      if (model) {
        result = psfcn_forward(*model, sample.images, sample.lights, sample.normal_map.mask);
        if (!probe_dir.empty()) {
          const Tensor probe = fused_feature_probe(*model, sample.images, sample.lights);
          fs::create_directories(probe_dir);
          const int c = probe.dim(0), ph = probe.dim(1), pw = probe.dim(2);
          const std::size_t plane = static_cast<std::size_t>(ph) * pw;
          for (int k = 0; k < c; ++k) {
            Tensor channel({1, ph, pw}, std::vector<float>(probe.values().begin() + k * plane,
                                                           probe.values().begin() + (k + 1) * plane));
            char name[32];
            std::snprintf(name, sizeof(name), "channel_%03d.pfm", k);
            write_pfm((fs::path(probe_dir) / name).string(), channel);
          }
        }
      } else {
        result = l2_solve(sample.images, sample.lights, sample.normal_map.mask).normals;
      }
      ensure_parent(out_path);
      const fs::path p(out_path);
      write_normal_map(out_path, (p.parent_path() / (p.stem().string() + "_mask.pfm")).string(), result);
      out << "wrote " << out_path << " (" << result.foreground_count() << " pixels)\n";
      return kExitOk;
    }

    if (eval->parsed()) {
      MetricReport report;
      const bool normals = !pred.empty() || !gt.empty();
      const bool lights = !pred_lights.empty() || !gt_lights.empty();
      if (normals && (pred.empty() || gt.empty())) throw UsageError("--pred and --gt go together");
      if (lights && (pred_lights.empty() || gt_lights.empty())) {
        throw UsageError("--pred-lights and --gt-lights go together");
      }
      if (!normals && !lights) throw UsageError("eval needs normal maps, lights or both");
      if (normals) {
        const NormalMap p = read_normal_map(pred, pred_mask.empty() ? companion_mask(pred) : pred_mask);
        const NormalMap g = read_normal_map(gt, gt_mask.empty() ? companion_mask(gt) : gt_mask);
        const NormalError e = mae_normals(p, g);
        report.normal_mae_degrees = e.mae_degrees;
        report.valid_pixel_count = e.valid_pixel_count;
        report.per_pixel_error_map = e.error_map;
        if (!error_map.empty()) {
          ensure_parent(error_map);
          write_pfm(error_map, render_error_map(e.error_map, e.mask, ceiling));
        }
      }
      if (lights) {
        const auto p = read_lights(pred_lights);
        const auto g = read_lights(gt_lights);
        report.direction_mae_degrees = mae_directions(p, g);
        std::vector<double> pe, ge;
        for (const auto& l : p) pe.push_back(l.intensity);
        for (const auto& l : g) ge.push_back(l.intensity);
        const ScaleInvariantError re = scale_invariant_re(pe, ge);
        report.intensity_re_scale = re.relative_error;
        report.fitted_scale_s = re.scale;
      }
      const json j = report.to_json();
      ensure_parent(out_path);
      write_file(out_path, j.dump(2) + "\n");
      out << j.dump() << "\n";
      return kExitOk;
    }

    if (selftest->parsed()) {
      bool all = true;
      for (const Check& c : run_selftest()) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        all = all && c.passed;
      }
      return all ? kExitOk : kExitData;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace psnet
