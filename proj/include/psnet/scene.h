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

#ifndef PSNET_SCENE_H_
#define PSNET_SCENE_H_

// Synthetic photometric-stereo observations: analytic shapes, parametric
// BRDFs, directional lights and the image formation model
//   m = e * rho(n, l) * max(n.l, 0) + noise
// under an orthographic camera looking down -z (view vector v = +z).
//
// Pixel (row, col) has row 0 at the top. Normals use x right, y up, z
// toward the camera.

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "psnet/tensor.h"

namespace psnet {

struct NormalMap {
  int height = 0;
  int width = 0;
  std::vector<Eigen::Vector3d> normals;  // row-major
  std::vector<std::uint8_t> mask;        // 1 = foreground

  NormalMap() = default;
  NormalMap(int height, int width);

  std::size_t pixel_count() const { return normals.size(); }
  std::size_t foreground_count() const;

  // [3,H,W] with background pixels zero.
  Tensor to_tensor() const;
  // [H,W] of {0,1}.
  Tensor mask_tensor() const;
  // Inverse of to_tensor(). When `mask` is undefined, pixels with a nonzero
  // vector are foreground.
  static NormalMap from_tensor(const Tensor& normals, const Tensor& mask = Tensor());
};

struct DirectionalLight {
  Eigen::Vector3d direction{0, 0, 1};
  double intensity = 1.0;
};

// Azimuth phi in [0,180] and elevation theta in [-90,90], in degrees:
//   l = (cos(theta) cos(phi), sin(theta), cos(theta) sin(phi)).
// phi = 90, theta = 0 is the zenith (0,0,1); phi in [0,180] gives l_z >= 0.
struct LightAngles {
  double azimuth_deg = 90;
  double elevation_deg = 0;
};

Eigen::Vector3d direction_from_angles(const LightAngles& angles);
// Assumes a unit vector; l_z is clamped to >= 0 before recovering phi.
LightAngles angles_from_direction(const Eigen::Vector3d& direction);

struct Lambertian {
  Eigen::Vector3d albedo{1, 1, 1};
  // Optional per-pixel RGB albedo; overrides `albedo` when non-empty.
  std::vector<Eigen::Vector3d> albedo_map;
};

struct BlinnPhong {
  Eigen::Vector3d diffuse{0.5, 0.5, 0.5};
  double specular = 0.5;
  double shininess = 32;
};

using BaseBRDF = std::variant<Lambertian, BlinnPhong>;

enum class MaterialMapKind { kRamp, kChecker, kIrregular };

struct MaterialMap {
  int height = 0;
  int width = 0;
  std::vector<double> weights;  // in [0,1], row-major
};

// Per-pixel convex combination: w * first + (1 - w) * second.
struct Blend {
  BaseBRDF first;
  BaseBRDF second;
  MaterialMap material;
};

using BRDFModel = std::variant<Lambertian, BlinnPhong, Blend>;

// Analytic height z(x, y) over the unit square, x to the right and y up.
struct HeightField {
  std::function<double(double, double)> height;
  std::function<Eigen::Vector2d(double, double)> gradient;
};

HeightField constant_height(double value);
// z = slope_x * x + slope_y * y
HeightField plane_height(double slope_x, double slope_y);
// z = amplitude * sin(2 pi frequency x)
HeightField sinusoid_height(double amplitude, double frequency);
// Sum of `count` random Gaussian bumps and dents; deterministic in seed.
HeightField gaussian_bumps(int count, std::uint64_t seed);
// Hemisphere of radius 0.5 centred on the square; zero outside the disk.
HeightField sphere_cap_height();

// Orthographic unit sphere filling the image: n = (x, y, sqrt(1-x^2-y^2))
// in normalized device coordinates, mask = open disk.
NormalMap sphere_normal_map(int resolution);
// n ~ (-dz/dx, -dz/dy, 1), full mask.
NormalMap heightfield_normal_map(const HeightField& field, int resolution);

struct LightSampling {
  double azimuth_span_deg = 180;
  double elevation_span_deg = 180;
  double intensity_min = 0.2;
  double intensity_max = 2.0;
};

// Lights uniform over the (azimuth, elevation) box centred at the zenith.
std::vector<DirectionalLight> sample_lights(int count, const LightSampling& sampling,
                                            std::uint64_t seed);

struct RenderOptions {
  bool cast_shadow = false;
  // Half-width of additive uniform noise applied inside the mask.
  double noise_sigma = 0;
  std::uint64_t noise_seed = 0;
  // Required when cast_shadow is set; must describe the normal map's surface.
  const HeightField* height_field = nullptr;
};

// [3,H,W] linear radiance. Background is exactly zero. Computed in double
// precision and rounded to T once.
template <typename T = float>
BasicTensor<T> render(const NormalMap& normal_map, const BRDFModel& brdf,
                      const DirectionalLight& light, const RenderOptions& options = {});

// [q,3,H,W]; noise seeds are derived per light from options.noise_seed.
template <typename T = float>
BasicTensor<T> render_stack(const NormalMap& normal_map, const BRDFModel& brdf,
                            const std::vector<DirectionalLight>& lights,
                            const RenderOptions& options = {});

MaterialMap make_material_map(MaterialMapKind kind, int resolution, std::uint64_t seed);

// One unit of dataset generation.
struct RenderedSample {
  Tensor images;  // [q,3,H,W]
  std::vector<DirectionalLight> lights;
  NormalMap normal_map;
  BRDFModel brdf;
  // Realized additive noise, [q,3,H,W]; undefined for noise-free renders.
  Tensor noise;
};

}  // namespace psnet

#endif  // PSNET_SCENE_H_
