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

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}  // namespace

Eigen::Vector3d direction_from_angles(const LightAngles& angles) {
  const double phi = angles.azimuth_deg * kDegToRad;
  const double theta = angles.elevation_deg * kDegToRad;
  return {std::cos(theta) * std::cos(phi), std::sin(theta), std::cos(theta) * std::sin(phi)};
}

LightAngles angles_from_direction(const Eigen::Vector3d& direction) {
  const double y = std::clamp(direction.y(), -1.0, 1.0);
  const double z = std::max(direction.z(), 0.0);
  LightAngles a;
  a.elevation_deg = std::asin(y) / kDegToRad;
  a.azimuth_deg = std::atan2(z, direction.x()) / kDegToRad;
  return a;
}

std::vector<DirectionalLight> sample_lights(int count, const LightSampling& sampling,
                                            std::uint64_t seed) {
  if (count < 1) throw UsageError("sample_lights: count must be >= 1");
  if (sampling.azimuth_span_deg < 0 || sampling.azimuth_span_deg > 180 ||
      sampling.elevation_span_deg < 0 || sampling.elevation_span_deg > 180) {
    throw UsageError("sample_lights: angular spans must lie in [0, 180] degrees");
  }
  if (sampling.intensity_min <= 0 || sampling.intensity_max < sampling.intensity_min) {
    throw UsageError("sample_lights: intensity range must be positive and ordered");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<DirectionalLight> lights;
  lights.reserve(count);
  for (int i = 0; i < count; ++i) {
    LightAngles a;
    a.azimuth_deg = 90 + sampling.azimuth_span_deg * (unit(rng) - 0.5);
    a.elevation_deg = sampling.elevation_span_deg * (unit(rng) - 0.5);
    DirectionalLight l;
    l.direction = direction_from_angles(a);
    l.intensity = sampling.intensity_min + (sampling.intensity_max - sampling.intensity_min) * unit(rng);
    lights.push_back(l);
  }
  return lights;
}

}  // namespace psnet
