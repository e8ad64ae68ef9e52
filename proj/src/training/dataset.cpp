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
#include <cmath>
#include <numeric>
#include <random>

#include "psnet/dataset.h"
#include "psnet/errors.h"
#include "psnet/random.h"

namespace psnet {
namespace {

Eigen::Vector3d random_rgb(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double a = u(rng), b = u(rng), c = u(rng);
  return {a, b, c};
}

BaseBRDF random_lambertian(std::mt19937_64& rng) { return Lambertian{random_rgb(rng, 0.3, 1.0), {}}; }

BaseBRDF random_blinn_phong(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> spec(0.2, 0.8), shine(10, 100);
  const Eigen::Vector3d kd = random_rgb(rng, 0.2, 0.8);
  const double ks = spec(rng);
  return BlinnPhong{kd, ks, shine(rng)};
}

template <typename T>
T pick(const std::vector<T>& options, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> u(0, options.size() - 1);
  return options[u(rng)];
}

}  // namespace

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSphere: return "sphere";
    case ShapeKind::kBumps: return "bumps";
    case ShapeKind::kSinusoid: return "sinusoid";
    case ShapeKind::kPlane: return "plane";
  }
  return "?";
}

std::string to_string(MaterialKind kind) {
  switch (kind) {
    case MaterialKind::kLambertian: return "lambertian";
    case MaterialKind::kBlinnPhong: return "blinn_phong";
    case MaterialKind::kBlend: return "blend";
  }
  return "?";
}

std::string to_string(MaterialMapKind kind) {
  switch (kind) {
    case MaterialMapKind::kRamp: return "ramp";
    case MaterialMapKind::kChecker: return "checker";
    case MaterialMapKind::kIrregular: return "irregular";
  }
  return "?";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  for (auto k : {ShapeKind::kSphere, ShapeKind::kBumps, ShapeKind::kSinusoid, ShapeKind::kPlane}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown shape '" + name + "'");
}

MaterialKind material_kind_from_string(const std::string& name) {
  for (auto k : {MaterialKind::kLambertian, MaterialKind::kBlinnPhong, MaterialKind::kBlend}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown material '" + name + "'");
}

MaterialMapKind material_map_kind_from_string(const std::string& name) {
  for (auto k : {MaterialMapKind::kRamp, MaterialMapKind::kChecker, MaterialMapKind::kIrregular}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown material map '" + name + "'");
}

void DatasetSpec::validate() const {
  if (sample_count < 1) throw ConfigError("dataset: sample_count must be >= 1");
  if (resolution < 8) throw ConfigError("dataset: resolution must be >= 8");
  if (lights_per_sample < 1) throw ConfigError("dataset: lights_per_sample must be >= 1");
  if (shapes.empty() || materials.empty()) throw ConfigError("dataset: shape and material lists must be non-empty");
  if (validation_fraction < 0 || validation_fraction >= 1) {
    throw ConfigError("dataset: validation_fraction must be in [0, 1)");
  }
  if (lights.azimuth_span_deg < 0 || lights.azimuth_span_deg > 180 || lights.elevation_span_deg < 0 ||
      lights.elevation_span_deg > 180) {
    throw ConfigError("dataset: light spans must be in [0, 180] degrees");
  }
  if (!(lights.intensity_min > 0) || lights.intensity_max < lights.intensity_min) {
    throw ConfigError("dataset: bad light intensity range");
  }
}

SceneDescription describe_scene(const DatasetSpec& spec, std::uint64_t seed, int index) {
  std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(index), 1}));
  SceneDescription scene;
  scene.shape = pick(spec.shapes, rng);
  scene.shape_seed = rng();
  switch (pick(spec.materials, rng)) {
    case MaterialKind::kLambertian:
      scene.brdf = std::get<Lambertian>(random_lambertian(rng));
      break;
    case MaterialKind::kBlinnPhong:
      scene.brdf = std::get<BlinnPhong>(random_blinn_phong(rng));
      break;
    case MaterialKind::kBlend: {
      BaseBRDF first = random_lambertian(rng);
      BaseBRDF second = random_blinn_phong(rng);
      scene.brdf = Blend{first, second, make_material_map(spec.blend_map, spec.resolution, rng())};
      break;
    }
  }
  scene.lights = sample_lights(spec.lights_per_sample, spec.lights, rng());
  return scene;
}

HeightField scene_height_field(ShapeKind shape, std::uint64_t shape_seed) {
  std::mt19937_64 rng(shape_seed);
  std::uniform_real_distribution<double> u(0, 1);
  switch (shape) {
    case ShapeKind::kSphere:
      return sphere_cap_height();
    case ShapeKind::kBumps:
      return gaussian_bumps(3 + static_cast<int>(u(rng) * 4), rng());
    case ShapeKind::kSinusoid:
      return sinusoid_height(0.03 + 0.07 * u(rng), 1 + 2 * u(rng));
    case ShapeKind::kPlane: {
      const double sx = u(rng) - 0.5;
      return plane_height(sx, u(rng) - 0.5);
    }
  }
  throw ConfigError("unknown shape");
}

NormalMap scene_normal_map(ShapeKind shape, std::uint64_t shape_seed, int resolution) {
  if (shape == ShapeKind::kSphere) return sphere_normal_map(resolution);
  return heightfield_normal_map(scene_height_field(shape, shape_seed), resolution);
}

RenderedSample render_scene(const DatasetSpec& spec, const SceneDescription& scene,
                            const std::vector<int>& light_indices) {
  RenderedSample sample;
  sample.normal_map = scene_normal_map(scene.shape, scene.shape_seed, spec.resolution);
  sample.brdf = scene.brdf;
  if (light_indices.empty()) {
    sample.lights = scene.lights;
  } else {
    for (int i : light_indices) {
      if (i < 0 || i >= static_cast<int>(scene.lights.size())) throw UsageError("render_scene: light index out of range");
      sample.lights.push_back(scene.lights[i]);
    }
  }
  RenderOptions options;
  HeightField field;
  if (spec.cast_shadow) {
    field = scene_height_field(scene.shape, scene.shape_seed);
    options.cast_shadow = true;
    options.height_field = &field;
  }
  sample.images = render_stack(sample.normal_map, sample.brdf, sample.lights, options);
  return sample;
}

DatasetSplit split_dataset(int sample_count, double validation_fraction, std::uint64_t seed) {
  std::vector<int> order(sample_count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, {2}));
  std::shuffle(order.begin(), order.end(), rng);
  const int n_val = static_cast<int>(std::lround(validation_fraction * sample_count));
  DatasetSplit split;
  split.validation.assign(order.begin(), order.begin() + n_val);
  split.train.assign(order.begin() + n_val, order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

ProceduralSource::ProceduralSource(DatasetSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  split_ = split_dataset(spec_.sample_count, spec_.validation_fraction, seed_);
}

RenderedSample ProceduralSource::load(int index, const std::vector<int>& light_indices) const {
  if (index < 0 || index >= spec_.sample_count) throw UsageError("ProceduralSource: sample index out of range");
  return render_scene(spec_, describe_scene(spec_, seed_, index), light_indices);
}

}  // namespace psnet
