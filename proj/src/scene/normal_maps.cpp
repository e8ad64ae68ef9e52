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
#include <numbers>
#include <random>

#include "psnet/errors.h"
#include "psnet/scene.h"

namespace psnet {

NormalMap::NormalMap(int h, int w)
    : height(h), width(w), normals(static_cast<std::size_t>(h) * w, Eigen::Vector3d::Zero()),
      mask(static_cast<std::size_t>(h) * w, 0) {}

std::size_t NormalMap::foreground_count() const {
  std::size_t n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  return n;
}

Tensor NormalMap::to_tensor() const {
  const std::size_t plane = pixel_count();
  Tensor t({3, height, width});
  for (std::size_t p = 0; p < plane; ++p) {
    if (!mask[p]) continue;
    for (int c = 0; c < 3; ++c) t[c * plane + p] = static_cast<float>(normals[p][c]);
  }
  return t;
}

Tensor NormalMap::mask_tensor() const {
  Tensor t({height, width});
  for (std::size_t p = 0; p < pixel_count(); ++p) t[p] = mask[p] ? 1.0f : 0.0f;
  return t;
}

NormalMap NormalMap::from_tensor(const Tensor& normals, const Tensor& mask) {
  if (normals.rank() != 3 || normals.dim(0) != 3) {
    throw UsageError("normal tensor must be [3,H,W], got " + shape_string(normals.shape()));
  }
  NormalMap map(normals.dim(1), normals.dim(2));
  const std::size_t plane = map.pixel_count();
  if (mask.defined() && mask.numel() != plane) {
    throw UsageError("mask has " + std::to_string(mask.numel()) + " pixels, normals have " +
                     std::to_string(plane));
  }
  for (std::size_t p = 0; p < plane; ++p) {
    Eigen::Vector3d n(normals[p], normals[plane + p], normals[2 * plane + p]);
    const bool inside = mask.defined() ? mask[p] != 0.0f : n.squaredNorm() > 0;
    map.mask[p] = inside ? 1 : 0;
    if (inside) map.normals[p] = n;
  }
  return map;
}

HeightField constant_height(double value) {
  return {[value](double, double) { return value; },
          [](double, double) { return Eigen::Vector2d::Zero().eval(); }};
}

HeightField plane_height(double slope_x, double slope_y) {
  return {[=](double x, double y) { return slope_x * x + slope_y * y; },
          [=](double, double) { return Eigen::Vector2d(slope_x, slope_y); }};
}

HeightField sinusoid_height(double amplitude, double frequency) {
  const double w = 2 * std::numbers::pi * frequency;
  return {[=](double x, double) { return amplitude * std::sin(w * x); },
          [=](double x, double) { return Eigen::Vector2d(amplitude * w * std::cos(w * x), 0); }};
}

HeightField gaussian_bumps(int count, std::uint64_t seed) {
  struct Bump {
    double cx, cy, sigma, amplitude;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<Bump> bumps;
  for (int i = 0; i < count; ++i) {
    Bump b;
    b.cx = unit(rng);
    b.cy = unit(rng);
    b.sigma = 0.08 + 0.17 * unit(rng);
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    b.amplitude = sign * b.sigma * (0.5 + 1.5 * unit(rng));
    bumps.push_back(b);
  }
  auto height = [bumps](double x, double y) {
    double z = 0;
    for (const Bump& b : bumps) {
      const double dx = x - b.cx, dy = y - b.cy;
      z += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2 * b.sigma * b.sigma));
    }
    return z;
  };
  auto gradient = [bumps](double x, double y) {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (const Bump& b : bumps) {
      const double dx = x - b.cx, dy = y - b.cy;
      const double s2 = b.sigma * b.sigma;
      const double e = b.amplitude * std::exp(-(dx * dx + dy * dy) / (2 * s2));
      g += Eigen::Vector2d(-e * dx / s2, -e * dy / s2);
    }
    return g;
  };
  return {height, gradient};
}

HeightField sphere_cap_height() {
  auto height = [](double x, double y) {
    const double dx = x - 0.5, dy = y - 0.5;
    return std::sqrt(std::max(0.25 - dx * dx - dy * dy, 0.0));
  };
  auto gradient = [height](double x, double y) {
    const double z = height(x, y);
    if (z <= 0) return Eigen::Vector2d::Zero().eval();
    return Eigen::Vector2d(-(x - 0.5) / z, -(y - 0.5) / z);
  };
  return {height, gradient};
}

NormalMap sphere_normal_map(int resolution) {
  if (resolution < 8) throw UsageError("sphere_normal_map: resolution must be >= 8");
  NormalMap map(resolution, resolution);
  for (int r = 0; r < resolution; ++r) {
    const double y = 1.0 - 2.0 * (r + 0.5) / resolution;
    for (int c = 0; c < resolution; ++c) {
      const double x = 2.0 * (c + 0.5) / resolution - 1.0;
      const double rho2 = x * x + y * y;
      if (rho2 >= 1.0) continue;
      const std::size_t p = static_cast<std::size_t>(r) * resolution + c;
      map.mask[p] = 1;
      map.normals[p] = Eigen::Vector3d(x, y, std::sqrt(1.0 - rho2));
    }
  }
  return map;
}

NormalMap heightfield_normal_map(const HeightField& field, int resolution) {
  if (resolution < 1) throw UsageError("heightfield_normal_map: resolution must be positive");
  NormalMap map(resolution, resolution);
  for (int r = 0; r < resolution; ++r) {
    const double y = 1.0 - (r + 0.5) / resolution;
    for (int c = 0; c < resolution; ++c) {
      const double x = (c + 0.5) / resolution;
      const Eigen::Vector2d g = field.gradient(x, y);
      const std::size_t p = static_cast<std::size_t>(r) * resolution + c;
      map.normals[p] = Eigen::Vector3d(-g.x(), -g.y(), 1.0).normalized();
      map.mask[p] = 1;
    }
  }
  return map;
}

}  // namespace psnet
