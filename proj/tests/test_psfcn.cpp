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

#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "gradcheck.h"
#include "psnet/errors.h"
#include "psnet/ops.h"
#include "psnet/psfcn.h"

using namespace psnet;
using psnet::testing::random_tensor;

namespace {

struct Pairs {
  Tensor images;
  std::vector<DirectionalLight> lights;
};

Pairs random_pairs(int q, int res, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Pairs p{cast<float>(random_tensor({q, 3, res, res}, rng, 0, 1)), sample_lights(q, {}, seed)};
  return p;
}

Pairs select(const Pairs& p, const std::vector<int>& order) {
  const std::size_t frame = p.images.numel() / p.images.dim(0);
  Shape s = p.images.shape();
  s[0] = static_cast<int>(order.size());
  Pairs out{Tensor(s), {}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::copy_n(p.images.values().begin() + order[i] * frame, frame, out.images.values().begin() + i * frame);
    out.lights.push_back(p.lights[order[i]]);
  }
  return out;
}

bool same_values(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

}  // namespace

TEST_CASE("PS-FCN: architecture and parameter budget") {
  PSFCNConfig full;
  full.width_multiplier = 1.0;
  PSFCNModel model = build_psfcn<float>(full, 1);
  CHECK(model.extractor.size() == 7);
  CHECK(model.regressor.size() == 4);
  CHECK(full.resolved_extractor_channels().back() == 128);
  const double count = static_cast<double>(model.parameter_count());
  CHECK(std::abs(count / 2.2e6 - 1) <= 0.10);

  PSFCNConfig desk;
  CHECK(desk.resolved_extractor_channels().back() == 32);
  PSFCNModel small = build_psfcn<float>(desk, 1);
  Pairs p = random_pairs(2, 8, 3);
  Tensor fused = fused_feature_probe(small, p.images, p.lights);
  CHECK(fused.shape() == Shape{32, 4, 4});

  PSFCNConfig bad;
  bad.extractor_channels = {4, 4};
  CHECK_THROWS_AS(build_psfcn<float>(bad, 1), ConfigError);
  bad = PSFCNConfig{};
  bad.width_multiplier = 0;
  CHECK_THROWS_AS(build_psfcn<float>(bad, 1), ConfigError);
}

TEST_CASE("PS-FCN: equal seeds give bit-identical builds") {
  PSFCNConfig cfg;
  auto a = build_psfcn<float>(cfg, 42).parameters();
  auto b = build_psfcn<float>(cfg, 42).parameters();
  auto c = build_psfcn<float>(cfg, 43).parameters();
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(same_values(a[i], b[i]));
    differs = differs || !same_values(a[i], c[i]);
  }
  CHECK(differs);
}

TEST_CASE("PS-FCN: untrained outputs are unit normals") {
  PSFCNModel model = build_psfcn<float>(PSFCNConfig{}, 7);
  Pairs p = random_pairs(5, 16, 8);
  NormalMap n = psfcn_forward(model, p.images, p.lights);
  CHECK(n.foreground_count() == 256);
  for (const auto& v : n.normals) CHECK(std::abs(v.norm() - 1) <= 1e-5);

  std::vector<std::uint8_t> mask(256, 0);
  mask[17] = 1;
  NormalMap masked = psfcn_forward(model, p.images, p.lights, mask);
  CHECK(masked.foreground_count() == 1);
  CHECK(masked.normals[16].norm() == 0);
}

TEST_CASE("PS-FCN: permuting the input pairs gives a bit-identical normal map") {
  PSFCNModel model = build_psfcn<float>(PSFCNConfig{}, 9);
  Pairs p = random_pairs(8, 16, 10);
  NormalMap base = psfcn_forward(model, p.images, p.lights);
  std::vector<int> order(8);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 3; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    Pairs shuffled = select(p, order);
    NormalMap other = psfcn_forward(model, shuffled.images, shuffled.lights);
    CHECK(other.normals == base.normals);
  }
}

TEST_CASE("PS-FCN: input validation") {
  PSFCNModel model = build_psfcn<float>(PSFCNConfig{}, 1);
  Pairs odd = random_pairs(2, 10, 1);
  CHECK_THROWS_AS(psfcn_forward(model, odd.images, odd.lights), UsageError);
  Pairs p = random_pairs(2, 8, 1);
  CHECK_THROWS_AS(psfcn_forward(model, p.images, {}), UsageError);
  CHECK_THROWS_AS(psfcn_forward(model, p.images, {p.lights[0]}), UsageError);

  PSFCNConfig ups;
  ups.input_mode = PSFCNInputMode::kImagesOnly;
  PSFCNModel uncalibrated = build_psfcn<float>(ups, 1);
  CHECK(uncalibrated.extractor[0].weight.dim(1) == 3);
  CHECK_NOTHROW(psfcn_forward(uncalibrated, p.images, {}));
  CHECK(psfcn_input_mode_from_string("normalized") == PSFCNInputMode::kNormalized);
  CHECK_THROWS_AS(psfcn_input_mode_from_string("bogus"), ConfigError);
}

TEST_CASE("PS-FCN: calibrated input tiles the light and divides by intensity") {
  PSFCNConfig cfg;
  Pairs p = random_pairs(2, 4, 4);
  Tensor input = psfcn_input(cfg, p.images, p.lights);
  CHECK(input.shape() == Shape{2, 6, 4, 4});
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 16; ++k) {
      CHECK(input[i * 96 + k] == doctest::Approx(p.images[i * 48 + k] / p.lights[i].intensity));
      for (int c = 0; c < 3; ++c) {
        CHECK(input[i * 96 + (3 + c) * 16 + k] == static_cast<float>(p.lights[i].direction[c]));
      }
    }
  }
}

TEST_CASE("PS-FCN normalized mode: a common image scale leaves the output unchanged") {
  PSFCNConfig cfg;
  cfg.input_mode = PSFCNInputMode::kNormalized;
  cfg.train_image_count = 6;
  PSFCNModel model = build_psfcn<float>(cfg, 12);
  Pairs p = random_pairs(6, 8, 13);
  for (float c : {0.25f, 2.0f, 8.0f}) {
    Tensor scaled = p.images.clone();
    for (auto& v : scaled.values()) v *= c;
    CHECK(same_values(psfcn_input(cfg, scaled, p.lights), psfcn_input(cfg, p.images, p.lights)));
    CHECK(psfcn_forward(model, scaled, p.lights).normals == psfcn_forward(model, p.images, p.lights).normals);
  }
  // Other factors agree to rounding.
  Tensor odd = p.images.clone();
  for (auto& v : odd.values()) v *= 3.3f;
  Tensor a = psfcn_input(cfg, odd, p.lights), b = psfcn_input(cfg, p.images, p.lights);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("PS-FCN fused features: recomputed max, duplicates and set union") {
  PSFCNModel model = build_psfcn<float>(PSFCNConfig{}, 21);
  Pairs p = random_pairs(4, 8, 22);
  Tensor fused = fused_feature_probe(model, p.images, p.lights);

  // Per-pair features computed one pair at a time.
  std::vector<Tensor> single;
  for (int i = 0; i < 4; ++i) single.push_back(fused_feature_probe(model, select(p, {i}).images, {p.lights[i]}));
  for (std::size_t k = 0; k < fused.numel(); ++k) {
    float m = single[0][k];
    for (int i = 1; i < 4; ++i) m = std::max(m, single[i][k]);
    CHECK(fused[k] == m);
  }

  Tensor duplicated = fused_feature_probe(model, select(p, {0, 1, 2, 3, 2}).images, select(p, {0, 1, 2, 3, 2}).lights);
  CHECK(same_values(duplicated, fused));

  Tensor first3 = fused_feature_probe(model, select(p, {0, 1, 2}).images, select(p, {0, 1, 2}).lights);
  for (std::size_t k = 0; k < fused.numel(); ++k) CHECK(fused[k] == std::max(first3[k], single[3][k]));
}

TEST_CASE("PS-FCN fused features: darkening one input only matters where it was the maximum") {
  PSFCNModel model = build_psfcn<float>(PSFCNConfig{}, 31);
  Pairs p = random_pairs(5, 16, 32);
  const int j = 2;
  std::vector<Tensor> before;
  for (int i = 0; i < 5; ++i) before.push_back(fused_feature_probe(model, select(p, {i}).images, {p.lights[i]}));
  Tensor fused = fused_feature_probe(model, p.images, p.lights);

  // Zero the left half of image j, as if it were in cast shadow.
  Pairs shadowed = p;
  shadowed.images = p.images.clone();
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 16; ++r) {
      for (int col = 0; col < 8; ++col) shadowed.images.values()[((j * 3 + c) * 16 + r) * 16 + col] = 0;
    }
  }
  Tensor after_j = fused_feature_probe(model, select(shadowed, {j}).images, {p.lights[j]});
  Tensor fused_after = fused_feature_probe(model, shadowed.images, shadowed.lights);
  std::size_t changed = 0;
  for (std::size_t k = 0; k < fused.numel(); ++k) {
    float others = -std::numeric_limits<float>::infinity();
    for (int i = 0; i < 5; ++i) {
      if (i != j) others = std::max(others, before[i][k]);
    }
    CHECK(fused_after[k] == std::max(others, after_j[k]));
    if (fused_after[k] != fused[k]) {
      ++changed;
      CHECK((before[j][k] == fused[k] || after_j[k] == fused_after[k]));
    }
  }
  CHECK(changed > 0);
}

TEST_CASE("PS-FCN: full-network gradient matches finite differences (width 4, 4x4, float64)") {
  PSFCNConfig cfg;
  cfg.extractor_channels = {4, 4, 4, 4, 4, 4, 4};
  cfg.regression_channels = {4, 4, 4};
  auto model = build_psfcn<double>(cfg, 5);
  std::mt19937_64 rng(6);
  Tensor64 images = random_tensor({3, 3, 4, 4}, rng, 0.1, 1);
  auto lights = sample_lights(3, {}, 7);
  Tensor64 input = psfcn_input(cfg, images, lights);
  Tensor64 gt = l2_normalize_channels(random_tensor({3, 4, 4}, rng), 1e-12);
  Tensor64 mask = Tensor64::full({4, 4}, 1.0);
  mask.values()[5] = 0;
  auto result = psnet::testing::grad_check(model.parameters(), [&] {
    return cosine_loss(psfcn_predict(model, input), gt, mask);
  });
  CHECK(result.checked == model.parameter_count());
  CHECK(result.max_relative_error <= 1e-2);
}
