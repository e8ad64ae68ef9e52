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

#ifndef PSNET_METRICS_H_
#define PSNET_METRICS_H_

// Evaluation metrics: angular errors of normals and light directions, the
// scale-invariant intensity error, and error-map visualization.

#include <optional>
#include <vector>

#include "json.hpp"
#include "psnet/scene.h"
#include "psnet/tensor.h"

namespace psnet {

// Angle between two vectors in degrees; the cosine is clamped, so parallel
// and antiparallel inputs give exactly 0 and 180.
double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

struct NormalError {
  double mae_degrees = 0;
  std::size_t valid_pixel_count = 0;
  // [H,W] degrees; background (outside either mask) is 0.
  Tensor error_map;
  std::vector<std::uint8_t> mask;
};

// Mean over the intersection of both masks. Throws UsageError on a
// resolution mismatch or an empty intersection.
NormalError mae_normals(const NormalMap& pred, const NormalMap& gt);

// Index-aligned mean angle. Throws UsageError on a count mismatch or empty
// lists.
double mae_directions(const std::vector<Eigen::Vector3d>& pred, const std::vector<Eigen::Vector3d>& gt);
double mae_directions(const std::vector<DirectionalLight>& pred, const std::vector<DirectionalLight>& gt);

struct ScaleInvariantError {
  double relative_error = 0;
  double scale = 1;
};

// s = argmin sum (s e_i - gt_i)^2, RE = mean |s e_i - gt_i| / gt_i. Throws
// UsageError when all predictions are zero, a ground truth is not
// positive, or counts differ.
ScaleInvariantError scale_invariant_re(const std::vector<double>& pred, const std::vector<double>& gt);

inline constexpr double kDefaultErrorCeilingDeg = 45.0;

// [3,H,W] RGB: blue at 0, red at `ceiling` and above, black outside the
// mask. Throws UsageError unless ceiling > 0.
Tensor render_error_map(const Tensor& error_map, const std::vector<std::uint8_t>& mask,
                        double ceiling = kDefaultErrorCeilingDeg);

struct MetricReport {
  std::optional<double> normal_mae_degrees;
  std::optional<double> direction_mae_degrees;
  std::optional<double> intensity_re_scale;
  std::optional<double> fitted_scale_s;
  std::size_t valid_pixel_count = 0;
  Tensor per_pixel_error_map;

  // Missing values serialize as null.
  nlohmann::json to_json() const;
};

}  // namespace psnet

#endif  // PSNET_METRICS_H_
