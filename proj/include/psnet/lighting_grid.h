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

#ifndef PSNET_LIGHTING_GRID_H_
#define PSNET_LIGHTING_GRID_H_

// Discretized lighting space: azimuth in [0, 180], elevation in [-90, 90]
// (degrees, see direction_from_angles) and intensity in [min, max], each
// split into equal-width bins.

#include <Eigen/Core>

namespace psnet {

struct LightingGrid {
  int direction_bins = 36;
  int intensity_bins = 20;
  double min_intensity = 0.2;
  double max_intensity = 2.0;

  double angle_bin_width() const { return 180.0 / direction_bins; }
  double intensity_bin_width() const { return (max_intensity - min_intensity) / intensity_bins; }
  // Largest per-angle error of a decoded bin middle.
  double max_deviation_deg() const { return angle_bin_width() / 2; }

  // Throws ConfigError on non-positive bin counts or an empty range.
  void validate() const;
};

struct DirectionBins {
  int azimuth = 0;
  int elevation = 0;
};

struct IntensityBin {
  int bin = 0;
  bool clamped = false;  // e was outside [min, max]
};

// Throws UsageError when l_z < -1e-6.
DirectionBins discretize_direction(const Eigen::Vector3d& l, const LightingGrid& grid);
// Throws UsageError on out-of-range bins.
Eigen::Vector3d decode_direction(int azimuth_bin, int elevation_bin, const LightingGrid& grid);

IntensityBin discretize_intensity(double e, const LightingGrid& grid);
double decode_intensity(int bin, const LightingGrid& grid);

}  // namespace psnet

#endif  // PSNET_LIGHTING_GRID_H_
