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

#include "psnet/lighting_grid.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "psnet/errors.h"
#include "psnet/scene.h"

namespace psnet {
namespace {

int bin_of(double value, double width, int count) {
  return std::clamp(static_cast<int>(std::floor(value / width)), 0, count - 1);
}

void check_bin(int bin, int count, const char* what) {
  if (bin < 0 || bin >= count) {
    throw UsageError(std::string(what) + " bin " + std::to_string(bin) + " outside [0, " +
                     std::to_string(count) + ")");
  }
}

}  // namespace

void LightingGrid::validate() const {
  if (direction_bins < 1 || intensity_bins < 1) throw ConfigError("LightingGrid: bin counts must be >= 1");
  if (!(min_intensity < max_intensity)) throw ConfigError("LightingGrid: empty intensity range");
}

DirectionBins discretize_direction(const Eigen::Vector3d& l, const LightingGrid& grid) {
  if (l.z() < -1e-6) throw UsageError("discretize_direction: light points away from the camera");
  const LightAngles a = angles_from_direction(l.normalized());
  const double w = grid.angle_bin_width();
  return {bin_of(a.azimuth_deg, w, grid.direction_bins), bin_of(a.elevation_deg + 90, w, grid.direction_bins)};
}

Eigen::Vector3d decode_direction(int azimuth_bin, int elevation_bin, const LightingGrid& grid) {
  check_bin(azimuth_bin, grid.direction_bins, "azimuth");
  check_bin(elevation_bin, grid.direction_bins, "elevation");
  const double w = grid.angle_bin_width();
  return direction_from_angles({(azimuth_bin + 0.5) * w, (elevation_bin + 0.5) * w - 90});
}

IntensityBin discretize_intensity(double e, const LightingGrid& grid) {
  const bool clamped = e < grid.min_intensity || e > grid.max_intensity;
  return {bin_of(e - grid.min_intensity, grid.intensity_bin_width(), grid.intensity_bins), clamped};
}

double decode_intensity(int bin, const LightingGrid& grid) {
  check_bin(bin, grid.intensity_bins, "intensity");
  return grid.min_intensity + (bin + 0.5) * grid.intensity_bin_width();
}

}  // namespace psnet
