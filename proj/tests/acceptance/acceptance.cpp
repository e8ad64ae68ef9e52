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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.h"
#include "psnet/classic_ps.h"
#include "psnet/dataset.h"
#include "psnet/lcnet.h"
#include "psnet/metrics.h"
#include "psnet/ops.h"
#include "psnet/psfcn.h"
#include "psnet/training.h"

using namespace psnet;
using psnet::testing::grad_check;
using psnet::testing::random_tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Lambertian albedo_brdf(const std::vector<double>& albedo) {
  Lambertian lam;
  for (double a : albedo) lam.albedo_map.emplace_back(a, a, a);
  return lam;
}

Tensor permute_frames(const Tensor& images, const std::vector<int>& order) {
  const std::size_t frame = images.numel() / images.dim(0);
  Tensor out(images.shape());
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::copy_n(images.values().begin() + order[i] * frame, frame, out.values().begin() + i * frame);
  }
  return out;
}

// Desk-scale training recipes.

constexpr int kTrainSamples = 200;
constexpr int kHeldOutSamples = 20;
constexpr int kImages = 16;
constexpr int kEpochs = 10;
constexpr std::uint64_t kDataSeed = 12;
constexpr std::uint64_t kHeldOutSeed = 99;
constexpr std::uint64_t kEvalSeed = 3;

DatasetSpec desk_spec(std::vector<ShapeKind> shapes, std::vector<MaterialKind> materials) {
  DatasetSpec spec;
  spec.sample_count = kTrainSamples;
  spec.resolution = 128;
  spec.shapes = std::move(shapes);
  spec.materials = std::move(materials);
  return spec;
}

ProceduralSource held_out(DatasetSpec spec) {
  spec.sample_count = kHeldOutSamples;
  return ProceduralSource(spec, kHeldOutSeed);
}

std::vector<int> all_indices(const SampleSource& data) {
  std::vector<int> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

TrainConfig psfcn_recipe() {
  TrainConfig t;
  t.epochs = kEpochs;
  t.batch_size = 2;
  t.initial_lr = 1e-3;
  t.images_per_sample = kImages;
  t.seed = 5;
  // Larger crops than the default 32 give more supervised pixels per step;
  // at 32 the held-out error stalls around 10.5 degrees.
  t.augment.min_size = 64;
  t.augment.crop_size = 64;
  return t;
}

TrainConfig lcnet_recipe() {
  TrainConfig t;
  t.epochs = kEpochs;
  t.batch_size = 4;
  t.initial_lr = 1e-3;
  t.images_per_sample = kImages;
  t.seed = 5;
  t.augment.intensity_scaling = true;
  return t;
}

// Homogeneous materials only; two-material scenes are held out.
DatasetSpec psfcn_desk_spec() {
  return desk_spec({ShapeKind::kSphere, ShapeKind::kBumps}, {MaterialKind::kLambertian, MaterialKind::kBlinnPhong});
}

DatasetSpec lcnet_sphere_spec() {
  return desk_spec({ShapeKind::kSphere}, {MaterialKind::kLambertian, MaterialKind::kBlinnPhong});
}

DatasetSpec lcnet_plane_spec() {
  return desk_spec({ShapeKind::kPlane}, {MaterialKind::kLambertian, MaterialKind::kBlinnPhong});
}

// Models shared between criteria, trained on first use.
struct Shared {
  std::optional<LCNetModel> lcnet_classification;
  std::optional<LCNetEvaluation> lcnet_classification_eval;
  std::optional<PSFCNModel> psfcn_desk_model;
  double psfcn_desk_seconds = 0;

  const LCNetModel& lcnet() {
    if (!lcnet_classification) {
      ProceduralSource data(lcnet_sphere_spec(), kDataSeed);
      lcnet_classification = lcnet_from_checkpoint(train_lcnet(LCNetConfig{}, lcnet_recipe(), data));
    }
    return *lcnet_classification;
  }

  const PSFCNModel& psfcn_desk() {
    if (!psfcn_desk_model) {
      ProceduralSource data(psfcn_desk_spec(), kDataSeed);
      const auto start = Clock::now();
      psfcn_desk_model = psfcn_from_checkpoint(train_psfcn(PSFCNConfig{}, psfcn_recipe(), data));
      psfcn_desk_seconds = seconds_since(start);
    }
    return *psfcn_desk_model;
  }

  const LCNetEvaluation& lcnet_eval() {
    if (!lcnet_classification_eval) {
      ProceduralSource test = held_out(lcnet_sphere_spec());
      lcnet_classification_eval = evaluate_lcnet(lcnet(), test, all_indices(test), kImages, kEvalSeed);
    }
    return *lcnet_classification_eval;
  }
};

Shared shared;

// 1. Least-squares recovery on a noise-free Lambertian sphere.
Outcome exact_recovery() {
  const NormalMap sphere = sphere_normal_map(128);
  const std::vector<double> albedo(sphere.pixel_count(), 0.8);
  const auto lights = sample_lights(16, {120, 120, 1, 1}, 1);
  const Tensor images = render_stack(sphere, albedo_brdf(albedo), lights);
  const auto start = Clock::now();
  const L2Solution sol = l2_solve(images, lights, sphere.mask);
  const double elapsed = seconds_since(start);
  const NormalError err = mae_normals(sol.normals, sphere);
  const double coverage = static_cast<double>(err.valid_pixel_count) / sphere.foreground_count();
  return {err.mae_degrees < 0.1 && elapsed < 5 && coverage > 0.5,
          fmt("MAE %.2e deg over %.0f%% of the sphere, solve %.3f s", err.mae_degrees, 100 * coverage, elapsed)};
}

// 2. Renders are unchanged by a GBR transformation of the scene.
Outcome gbr_invariance() {
  const NormalMap sphere = sphere_normal_map(64);
  std::vector<double> albedo(sphere.pixel_count());
  for (std::size_t p = 0; p < albedo.size(); ++p) albedo[p] = 0.3 + 0.6 * static_cast<double>(p % 64) / 64;
  const auto lights = sample_lights(16, {}, 2);
  const Tensor64 reference = render_stack<double>(sphere, albedo_brdf(albedo), lights);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> offset(-0.5, 0.5), magnitude(0.5, 2.0);
  std::bernoulli_distribution negative(0.5);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const GBRMatrix g{offset(rng), offset(rng), (negative(rng) ? -1 : 1) * magnitude(rng)};
    const GBRScene t = gbr_transform(sphere, albedo, lights, g);
    const Tensor64 other = render_stack<double>(t.normals, albedo_brdf(t.albedo), t.lights);
    for (std::size_t k = 0; k < other.numel(); ++k) worst = std::max(worst, std::abs(other[k] - reference[k]));
  }
  return {worst < 1e-5, fmt("max pixel difference %.2e over 20 matrices", worst)};
}

// 3. Normalization cancels albedo; the test-time rescale restores magnitude.
Outcome normalization_identity() {
  const NormalMap sphere = sphere_normal_map(128);
  const auto lights = sample_lights(16, {}, 4);
  const Tensor a = cast<float>(normalize_observations(render_stack<double>(sphere, Lambertian{{0.3, 0.3, 0.3}, {}}, lights)));
  const Tensor b = cast<float>(normalize_observations(render_stack<double>(sphere, Lambertian{{0.9, 0.9, 0.9}, {}}, lights)));
  const bool identical = a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());

  // A constant profile over q images normalizes to 1/sqrt(q) per entry;
  // rescaling for a model trained on t images must give exactly 1/sqrt(t).
  bool exact = true;
  for (int q : {1, 4, 16, 64}) {
    const Tensor64 stack = normalize_observations(Tensor64::full({q, 3, 2, 2}, 0.5));
    for (int t : {1, 4, 16, 64}) {
      const Tensor64 rescaled = test_time_rescale(stack, q, t);
      for (double v : rescaled.values()) exact = exact && v == 1 / std::sqrt(static_cast<double>(t));
    }
  }
  return {identical && exact, std::string(identical ? "albedo 0.3 and 0.9 stacks bit-identical" : "stacks differ") +
                                  (exact ? ", rescale exact" : ", rescale inexact")};
}

// 4. Order-agnostic fusion.
Outcome order_agnostic() {
  const PSFCNModel psfcn = build_psfcn<float>(PSFCNConfig{}, 9);
  const NormalMap sphere = sphere_normal_map(32);
  const auto lights = sample_lights(8, {}, 10);
  const Tensor images = render_stack(sphere, BlinnPhong{}, lights);
  const Tensor base = psfcn_forward(psfcn, images, lights).to_tensor();
  std::vector<int> order(8);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(11);
  int psfcn_same = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<DirectionalLight> shuffled;
    for (int i : order) shuffled.push_back(lights[i]);
    const Tensor other = psfcn_forward(psfcn, permute_frames(images, order), shuffled).to_tensor();
    psfcn_same += std::equal(base.values().begin(), base.values().end(), other.values().begin());
  }

  const LCNetModel lcnet = build_lcnet<float>(LCNetConfig{}, 12);
  const NormalMap big = sphere_normal_map(128);
  const Tensor lc_images = render_stack(big, BlinnPhong{}, lights);
  const LCNetPrediction ref = lcnet_forward(lcnet, lc_images, big.mask);
  int lcnet_same = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    const LCNetPrediction p = lcnet_forward(lcnet, permute_frames(lc_images, order), big.mask);
    bool same = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
      same = same && p.lights[i].direction == ref.lights[order[i]].direction &&
             p.lights[i].intensity == ref.lights[order[i]].intensity &&
             p.azimuth_probabilities[i] == ref.azimuth_probabilities[order[i]] &&
             p.elevation_probabilities[i] == ref.elevation_probabilities[order[i]] &&
             p.intensity_probabilities[i] == ref.intensity_probabilities[order[i]];
    }
    lcnet_same += same;
  }
  return {psfcn_same == 50 && lcnet_same == 10,
          fmt("PS-FCN identical under %.0f/50 permutations, LCNet equivariant under %.0f/10", psfcn_same, lcnet_same)};
}

// 5. Analytic gradients against 64-bit central differences.
Outcome gradient_suite() {
  const auto start = Clock::now();
  double op_worst = 0, net_worst = 0;
  std::mt19937_64 rng(20);
  auto op = [&](std::vector<Tensor64> params, auto loss) {
    op_worst = std::max(op_worst, grad_check(std::move(params), loss).max_relative_error);
  };
  auto weighted = [&](const Tensor64& y) {
    Tensor64 r = random_tensor(y.shape(), rng);
    return [r](const Tensor64& t) { return sum(mul(t, r)); };
  };

  for (int stride : {1, 2}) {
    Tensor64 x = random_tensor({2, 2, 5, 5}, rng), w = random_tensor({3, 2, 3, 3}, rng), b = random_tensor({3}, rng);
    auto f = weighted(conv2d(x, w, b, stride, 1));
    op({x, w, b}, [&] { return f(conv2d(x, w, b, stride, 1)); });
  }
  for (auto [k, p] : {std::pair{4, 1}, std::pair{2, 0}}) {
    Tensor64 x = random_tensor({2, 3, 3, 4}, rng), w = random_tensor({3, 2, k, k}, rng), b = random_tensor({2}, rng);
    auto f = weighted(deconv2d(x, w, b, 2, p));
    op({x, w, b}, [&] { return f(deconv2d(x, w, b, 2, p)); });
  }
  {
    Tensor64 x = random_tensor({3, 5}, rng), w = random_tensor({4, 5}, rng), b = random_tensor({4}, rng);
    auto f = weighted(linear(x, w, b));
    op({x, w, b}, [&] { return f(linear(x, w, b)); });
  }
  {
    Tensor64 x = random_tensor({2, 7}, rng), y = random_tensor({2, 7}, rng);
    auto f = weighted(x);
    op({x}, [&] { return f(leaky_relu(x, 0.1)); });
    op({x}, [&] { return f(softplus(x)); });
    op({x}, [&] { return f(abs(x)); });
    op({x}, [&] { return f(scale(x, -1.7)); });
    op({x, y}, [&] { return f(add(x, y)); });
    op({x, y}, [&] { return f(sub(x, y)); });
    op({x, y}, [&] { return f(mul(x, y)); });
    op({x}, [&] { return mean(mul(x, x)); });
  }
  {
    Tensor64 a = random_tensor({3, 4}, rng), b = random_tensor({3, 2}, rng), row = random_tensor({1, 4}, rng);
    auto fc = weighted(concat_columns(a, b));
    op({a, b}, [&] { return fc(concat_columns(a, b)); });
    auto fr = weighted(repeat_rows(row, 3));
    op({row}, [&] { return fr(repeat_rows(row, 3)); });
    auto fs = weighted(sum_rows(a));
    op({a}, [&] { return fs(sum_rows(a)); });
    auto fre = weighted(reshape(a, {12}));
    op({a}, [&] { return fre(reshape(a, {12})); });
  }
  {
    Tensor64 x = random_tensor({2, 3, 3, 3}, rng);
    auto f = weighted(x);
    op({x}, [&] { return f(l2_normalize_channels(x, 1e-8)); });
  }
  {
    std::vector<Tensor64> feats;
    for (int i = 0; i < 4; ++i) feats.push_back(random_tensor({2, 3, 3}, rng));
    auto f = weighted(feats[0]);
    op(feats, [&] { return f(max_fuse<double>(feats)); });
    Tensor64 x = random_tensor({4, 2, 3, 3}, rng);
    auto g = weighted(max_over_batch(x));
    op({x}, [&] { return g(max_over_batch(x)); });
  }
  {
    Tensor64 logits = random_tensor({4, 6}, rng, -3, 3);
    const std::vector<int> targets{0, 5, 2, 2};
    op({logits}, [&] { return softmax_cross_entropy<double>(logits, targets); });
  }
  {
    Tensor64 pred = random_tensor({3, 4, 4}, rng), gt = random_tensor({3, 4, 4}, rng);
    Tensor64 mask({4, 4});
    for (std::size_t i = 0; i < mask.numel(); ++i) mask[i] = (i % 3) ? 1 : 0;
    op({pred}, [&] { return cosine_loss(pred, gt, mask); });
  }

  {
    PSFCNConfig cfg;
    cfg.extractor_channels = {4, 4, 4, 4, 4, 4, 4};
    cfg.regression_channels = {4, 4, 4};
    const auto model = build_psfcn<double>(cfg, 5);
    const Tensor64 images = random_tensor({3, 3, 4, 4}, rng, 0.1, 1);
    const auto lights = sample_lights(3, {}, 7);
    const Tensor64 input = psfcn_input(cfg, images, lights);
    const Tensor64 gt = l2_normalize_channels(random_tensor({3, 4, 4}, rng), 1e-12);
    const Tensor64 mask = Tensor64::full({4, 4}, 1.0);
    net_worst = std::max(net_worst, grad_check(model.parameters(), [&] {
                                      return cosine_loss(psfcn_predict(model, input), gt, mask);
                                    }).max_relative_error);
  }
  for (auto mode : {LCNetHeadMode::kClassification, LCNetHeadMode::kRegression}) {
    LCNetConfig cfg;
    cfg.input_size = 4;
    cfg.conv_channels = {4, 4, 4, 4, 4, 4};
    cfg.fc_channels = {4, 4};
    cfg.grid = {6, 5, 0.2, 2.0};
    cfg.head_mode = mode;
    const auto model = build_lcnet<double>(cfg, 11);
    const Tensor64 input = lcnet_input(cfg, random_tensor({3, 3, 4, 4}, rng, 0, 1), {});
    const auto lights = sample_lights(3, {}, 13);
    const LightTargets targets = light_targets(lights, cfg.grid);
    net_worst = std::max(net_worst, grad_check(model.parameters(), [&] {
                                      const LCNetOutput<double> out = lcnet_outputs(model, input);
                                      return mode == LCNetHeadMode::kClassification
                                                 ? lighting_loss(out, targets)
                                                 : lighting_regression_loss(out, lights);
                                    }).max_relative_error);
  }
  const double elapsed = seconds_since(start);
  return {op_worst <= 1e-3 && net_worst <= 1e-2 && elapsed < 60,
          fmt("op max relative error %.2e, network %.2e, %.1f s", op_worst, net_worst, elapsed)};
}

// 6. Lighting discretization error bound.
Outcome discretization_bound() {
  const LightingGrid grid;
  const double w = grid.angle_bin_width();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  int violations = 0;
  double worst_angle = 0, worst_excess = -1e9;
  for (int i = 0; i < 100000; ++i) {
    const Eigen::Vector3d l = Eigen::Vector3d(g(rng), g(rng), std::abs(g(rng))).normalized();
    const DirectionBins b = discretize_direction(l, grid);
    const Eigen::Vector3d centre = decode_direction(b.azimuth, b.elevation, grid);
    double bound = 0;
    for (int da : {0, 1}) {
      for (int de : {0, 1}) {
        bound = std::max(bound, angle_between_deg(direction_from_angles({(b.azimuth + da) * w, (b.elevation + de) * w - 90}), centre));
      }
    }
    const double err = angle_between_deg(l, centre);
    worst_excess = std::max(worst_excess, err - bound);
    violations += err > bound + 1e-9;
    const LightAngles a = angles_from_direction(l), c = angles_from_direction(centre);
    worst_angle = std::max({worst_angle, std::abs(a.azimuth_deg - c.azimuth_deg), std::abs(a.elevation_deg - c.elevation_deg)});
  }
  const bool ok = violations == 0 && grid.max_deviation_deg() == 2.5 && worst_angle <= 2.5 + 1e-9;
  return {ok, fmt("%.0f bound violations in 1e5, max per-angle deviation %.4f deg (delta %.2f)", violations,
                  worst_angle, grid.max_deviation_deg())};
}

// 7. Desk-scale calibrated PS-FCN.
Outcome toy_psfcn() {
  const PSFCNModel& model = shared.psfcn_desk();
  ProceduralSource test = held_out(psfcn_desk_spec());
  const double mae = evaluate_psfcn(model, test, all_indices(test), kImages, kEvalSeed).normal_mae_degrees;
  return {mae < 10 && shared.psfcn_desk_seconds < 1800,
          fmt("held-out MAE %.2f deg, training %.0f s", mae, shared.psfcn_desk_seconds)};
}

// 8. Desk-scale LCNet, classification and regression heads.
Outcome toy_lcnet() {
  const LCNetEvaluation cls = shared.lcnet_eval();
  ProceduralSource data(lcnet_sphere_spec(), kDataSeed);
  LCNetConfig reg_cfg;
  reg_cfg.head_mode = LCNetHeadMode::kRegression;
  const LCNetModel reg_model = lcnet_from_checkpoint(train_lcnet(reg_cfg, lcnet_recipe(), data));
  ProceduralSource test = held_out(lcnet_sphere_spec());
  const LCNetEvaluation reg = evaluate_lcnet(reg_model, test, all_indices(test), kImages, kEvalSeed);
  const bool ok = cls.direction_mae_degrees < 15 && cls.intensity_re < 0.15 &&
                  cls.direction_mae_degrees <= reg.direction_mae_degrees;
  return {ok, fmt("classification MAE %.2f deg RE %.3f; regression MAE %.2f deg RE %.3f", cls.direction_mae_degrees,
                  cls.intensity_re, reg.direction_mae_degrees, reg.intensity_re)};
}

// 9. PS-FCN trained on estimated lights copes better with them.
Outcome noisy_lighting() {
  const DatasetSpec spec = lcnet_sphere_spec();
  ProceduralSource data(spec, kDataSeed);
  const LCNetModel& lcnet = shared.lcnet();
  const PSFCNModel plain = psfcn_from_checkpoint(train_psfcn(PSFCNConfig{}, psfcn_recipe(), data));
  const PSFCNModel dagger = psfcn_from_checkpoint(train_psfcn_dagger(PSFCNConfig{}, psfcn_recipe(), lcnet, data));
  ProceduralSource test = held_out(spec);
  const LightProvider estimated = [&](const RenderedSample& s, int) { return estimate_lights(lcnet, s); };
  const double mae_plain = evaluate_psfcn(plain, test, all_indices(test), kImages, kEvalSeed, estimated).normal_mae_degrees;
  const double mae_dagger = evaluate_psfcn(dagger, test, all_indices(test), kImages, kEvalSeed, estimated).normal_mae_degrees;
  return {mae_dagger <= mae_plain,
          fmt("with estimated lights: trained on estimates %.2f deg, trained on ground truth %.2f deg", mae_dagger, mae_plain)};
}

// 10. Trained on homogeneous materials, tested on two-material spheres.
Outcome normalized_svbrdf() {
  ProceduralSource data(psfcn_desk_spec(), kDataSeed);
  PSFCNConfig normalized;
  normalized.input_mode = PSFCNInputMode::kNormalized;
  const PSFCNModel& calibrated = shared.psfcn_desk();
  const PSFCNModel b = psfcn_from_checkpoint(train_psfcn(normalized, psfcn_recipe(), data));
  DatasetSpec spec = desk_spec({ShapeKind::kSphere}, {MaterialKind::kBlend});
  spec.blend_map = MaterialMapKind::kChecker;
  ProceduralSource test = held_out(spec);
  const double mae_cal = evaluate_psfcn(calibrated, test, all_indices(test), kImages, kEvalSeed).normal_mae_degrees;
  const double mae_norm = evaluate_psfcn(b, test, all_indices(test), kImages, kEvalSeed).normal_mae_degrees;
  return {mae_norm <= mae_cal, fmt("normalized %.2f deg, calibrated %.2f deg", mae_norm, mae_cal)};
}

// 11. Metric identities.
Outcome metric_identities() {
  const NormalMap n = sphere_normal_map(64);
  NormalMap flipped = n;
  for (auto& v : flipped.normals) v = -v;
  const double same = mae_normals(n, n).mae_degrees;
  const double opposite = mae_normals(n, flipped).mae_degrees;
  const std::vector<double> gt{0.4, 1.1, 1.7, 0.9};
  std::vector<double> doubled(gt);
  for (double& v : doubled) v *= 2;
  const double scaled_re = scale_invariant_re(doubled, gt).relative_error;
  const ScaleInvariantError worked = scale_invariant_re({1, 2}, {1, 1});
  const bool ok = same == 0 && std::abs(opposite - 180) < 1e-9 && std::abs(scaled_re) < 1e-12 &&
                  std::abs(worked.scale - 0.6) < 1e-12 && std::abs(worked.relative_error - 0.3) < 1e-12;
  return {ok, fmt("MAE(N,N)=%g MAE(N,-N)=%.9g RE(2e,e)=%g worked s=%.3f", same, opposite, scaled_re, worked.scale) +
                  fmt(" RE=%.3f", worked.relative_error)};
}

// 12. LCNet cannot recover lighting from a uniform plane.
Outcome planar_limitation() {
  const double sphere_mae = shared.lcnet_eval().direction_mae_degrees;
  ProceduralSource data(lcnet_plane_spec(), kDataSeed);
  const LCNetModel planar = lcnet_from_checkpoint(train_lcnet(LCNetConfig{}, lcnet_recipe(), data));
  ProceduralSource test = held_out(lcnet_plane_spec());
  const double plane_mae = evaluate_lcnet(planar, test, all_indices(test), kImages, kEvalSeed).direction_mae_degrees;
  return {plane_mae > 3 * sphere_mae, fmt("plane MAE %.2f deg, sphere MAE %.2f deg (ratio %.1f)", plane_mae, sphere_mae,
                                          plane_mae / sphere_mae)};
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "least-squares exact recovery", exact_recovery},
      {2, "GBR invariance", gbr_invariance},
      {3, "normalization identity", normalization_identity},
      {4, "order-agnostic fusion", order_agnostic},
      {5, "gradient suite", gradient_suite},
      {6, "discretization bound", discretization_bound},
      {7, "toy training, calibrated PS-FCN", toy_psfcn},
      {8, "toy training, LCNet", toy_lcnet},
      {9, "noisy-lighting robustness ordering", noisy_lighting},
      {10, "normalized-mode SVBRDF ordering", normalized_svbrdf},
      {11, "metric identities", metric_identities},
      {12, "planar lighting limitation", planar_limitation},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.number) == selected.end()) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", c.number, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
