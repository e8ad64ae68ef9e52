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
#include <optional>
#include <random>

#include "psnet/errors.h"
#include "psnet/random.h"
#include "psnet/scene.h"

namespace psnet {

namespace {

const Eigen::Vector3d kView(0, 0, 1);

Eigen::Vector3d shade_lambertian(const Lambertian& lam, std::size_t pixel, double ndotl) {
  const Eigen::Vector3d& rho = lam.albedo_map.empty() ? lam.albedo : lam.albedo_map[pixel];
  return rho * ndotl;
}

Eigen::Vector3d shade_blinn_phong(const BlinnPhong& bp, const Eigen::Vector3d& n, const Eigen::Vector3d& l,
                                  double ndotl) {
  Eigen::Vector3d h = l + kView;
  const double hn = h.norm();
  double spec = 0;
  if (hn > 0) {
    const double ndoth = std::max(n.dot(h / hn), 0.0);
    spec = bp.specular * std::pow(ndoth, bp.shininess);
  }
  return bp.diffuse * ndotl + Eigen::Vector3d::Constant(spec);
}

Eigen::Vector3d shade_base(const BaseBRDF& brdf, std::size_t pixel, const Eigen::Vector3d& n,
                           const Eigen::Vector3d& l) {
  const double ndotl = n.dot(l);
  if (ndotl <= 0) return Eigen::Vector3d::Zero();
  if (const auto* lam = std::get_if<Lambertian>(&brdf)) return shade_lambertian(*lam, pixel, ndotl);
  return shade_blinn_phong(std::get<BlinnPhong>(brdf), n, l, ndotl);
}

void check_brdf(const NormalMap& map, const BRDFModel& brdf) {
  auto check_base = [&](const BaseBRDF& b) {
    if (const auto* lam = std::get_if<Lambertian>(&b)) {
      if (!lam->albedo_map.empty() && lam->albedo_map.size() != map.pixel_count()) {
        throw ConfigError("render: albedo map size does not match the normal map");
      }
    }
  };
  if (const auto* blend = std::get_if<Blend>(&brdf)) {
    if (blend->material.height != map.height || blend->material.width != map.width ||
        blend->material.weights.size() != map.pixel_count()) {
      throw ConfigError("render: material map resolution does not match the normal map");
    }
    check_base(blend->first);
    check_base(blend->second);
  } else if (const auto* lam = std::get_if<Lambertian>(&brdf)) {
    check_base(*lam);
  }
}

Eigen::Vector3d shade(const BRDFModel& brdf, std::size_t pixel, const Eigen::Vector3d& n,
                      const Eigen::Vector3d& l) {
  if (const auto* blend = std::get_if<Blend>(&brdf)) {
    const double w = blend->material.weights[pixel];
    return w * shade_base(blend->first, pixel, n, l) + (1 - w) * shade_base(blend->second, pixel, n, l);
  }
  // Dispatch directly: converting to BaseBRDF would copy the albedo map.
  const double ndotl = n.dot(l);
  if (ndotl <= 0) return Eigen::Vector3d::Zero();
  if (const auto* lam = std::get_if<Lambertian>(&brdf)) return shade_lambertian(*lam, pixel, ndotl);
  return shade_blinn_phong(std::get<BlinnPhong>(brdf), n, l, ndotl);
}

// Fixed-step ray march against the analytic height function.
std::vector<std::uint8_t> cast_shadows(const NormalMap& map, const HeightField& field,
                                       const Eigen::Vector3d& l) {
  std::vector<std::uint8_t> shadowed(map.pixel_count(), 0);
  const double horizontal = std::hypot(l.x(), l.y());
  if (horizontal < 1e-9) return shadowed;
  // Upper bound on the surface: sampled maximum plus half a pixel diagonal at the steepest sampled slope.
  double top = -std::numeric_limits<double>::infinity();
  double steepest = 0;
  std::vector<double> heights(map.pixel_count());
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      const double x = (c + 0.5) / map.width, y = 1.0 - (r + 0.5) / map.height;
      const double h = field.height(x, y);
      heights[static_cast<std::size_t>(r) * map.width + c] = h;
      top = std::max(top, h);
      steepest = std::max(steepest, field.gradient(x, y).norm());
    }
  }
  const double pitch = 1.0 / std::max(map.height, map.width);
  top += steepest * pitch;
  const double dt = pitch / horizontal;
  constexpr double kBias = 1e-9;
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      const std::size_t p = static_cast<std::size_t>(r) * map.width + c;
      if (!map.mask[p] || map.normals[p].dot(l) <= 0) continue;
      const Eigen::Vector3d origin((c + 0.5) / map.width, 1.0 - (r + 0.5) / map.height, heights[p]);
      for (int k = 1;; ++k) {
        const Eigen::Vector3d q = origin + (k * dt) * l;
        if (q.z() > top || q.x() < 0 || q.x() > 1 || q.y() < 0 || q.y() > 1) break;
        if (field.height(q.x(), q.y()) > q.z() + kBias) {
          shadowed[p] = 1;
          break;
        }
      }
    }
  }
  return shadowed;
}

}  // namespace

template <typename T>
BasicTensor<T> render(const NormalMap& normal_map, const BRDFModel& brdf, const DirectionalLight& light,
                      const RenderOptions& options) {
  if (options.cast_shadow && !options.height_field) {
    throw ConfigError("render: cast_shadow requires a height field");
  }
  check_brdf(normal_map, brdf);
  const std::size_t plane = normal_map.pixel_count();
  std::vector<std::uint8_t> shadowed;
  if (options.cast_shadow) shadowed = cast_shadows(normal_map, *options.height_field, light.direction);

  std::mt19937_64 rng(options.noise_seed);
  std::uniform_real_distribution<double> noise(-options.noise_sigma, options.noise_sigma);
  std::vector<T> out(3 * plane, T(0));
  for (std::size_t p = 0; p < plane; ++p) {
    if (!normal_map.mask[p]) continue;
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    if (shadowed.empty() || !shadowed[p]) {
      m = light.intensity * shade(brdf, p, normal_map.normals[p], light.direction);
    }
    for (int c = 0; c < 3; ++c) {
      double v = m[c];
      if (options.noise_sigma > 0) v = std::max(v + noise(rng), 0.0);
      out[c * plane + p] = static_cast<T>(v);
    }
  }
  return BasicTensor<T>({3, normal_map.height, normal_map.width}, std::move(out));
}

template <typename T>
BasicTensor<T> render_stack(const NormalMap& normal_map, const BRDFModel& brdf,
                            const std::vector<DirectionalLight>& lights, const RenderOptions& options) {
  if (lights.empty()) throw UsageError("render_stack: no lights");
  const std::size_t frame = 3 * normal_map.pixel_count();
  BasicTensor<T> stack({static_cast<int>(lights.size()), 3, normal_map.height, normal_map.width});
  for (std::size_t i = 0; i < lights.size(); ++i) {
    RenderOptions opt = options;
    opt.noise_seed = derive_seed(options.noise_seed, {i});
    BasicTensor<T> img = render<T>(normal_map, brdf, lights[i], opt);
    std::copy(img.values().begin(), img.values().end(), stack.values().begin() + i * frame);
  }
  return stack;
}

template Tensor render<float>(const NormalMap&, const BRDFModel&, const DirectionalLight&, const RenderOptions&);
template Tensor64 render<double>(const NormalMap&, const BRDFModel&, const DirectionalLight&, const RenderOptions&);
template Tensor render_stack<float>(const NormalMap&, const BRDFModel&, const std::vector<DirectionalLight>&,
                                   const RenderOptions&);
template Tensor64 render_stack<double>(const NormalMap&, const BRDFModel&, const std::vector<DirectionalLight>&,
                                       const RenderOptions&);

}  // namespace psnet
