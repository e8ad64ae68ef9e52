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

#include "psnet/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "psnet/errors.h"

namespace psnet {

double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double denom = a.norm() * b.norm();
  if (!(denom > 0)) throw UsageError("angle_between_deg: zero-length vector");
  return std::acos(std::clamp(a.dot(b) / denom, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

NormalError mae_normals(const NormalMap& pred, const NormalMap& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw UsageError("mae_normals: resolution mismatch " + std::to_string(pred.height) + "x" +
                     std::to_string(pred.width) + " vs " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
  }
  NormalError out;
  out.error_map = Tensor::zeros({gt.height, gt.width});
  out.mask.assign(gt.pixel_count(), 0);
  double total = 0;
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    if (!pred.mask[p] || !gt.mask[p]) continue;
    const double e = angle_between_deg(pred.normals[p], gt.normals[p]);
    out.error_map.values()[p] = static_cast<float>(e);
    out.mask[p] = 1;
    total += e;
    ++out.valid_pixel_count;
  }
  if (out.valid_pixel_count == 0) throw UsageError("mae_normals: masks do not overlap");
  out.mae_degrees = total / out.valid_pixel_count;
  return out;
}

double mae_directions(const std::vector<Eigen::Vector3d>& pred, const std::vector<Eigen::Vector3d>& gt) {
  if (pred.size() != gt.size()) {
    throw UsageError("mae_directions: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(gt.size()) + " ground-truth lights");
  }
  if (pred.empty()) throw UsageError("mae_directions: no lights");
  double total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += angle_between_deg(pred[i], gt[i]);
  return total / pred.size();
}

double mae_directions(const std::vector<DirectionalLight>& pred, const std::vector<DirectionalLight>& gt) {
  std::vector<Eigen::Vector3d> a, b;
  for (const auto& l : pred) a.push_back(l.direction);
  for (const auto& l : gt) b.push_back(l.direction);
  return mae_directions(a, b);
}

ScaleInvariantError scale_invariant_re(const std::vector<double>& pred, const std::vector<double>& gt) {
  if (pred.size() != gt.size() || pred.empty()) throw UsageError("scale_invariant_re: count mismatch or empty");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(gt[i] > 0)) throw UsageError("scale_invariant_re: ground-truth intensities must be positive");
    num += pred[i] * gt[i];
    den += pred[i] * pred[i];
  }
  if (den == 0) throw UsageError("scale_invariant_re: all predicted intensities are zero");
  ScaleInvariantError out;
  out.scale = num / den;
  double total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(out.scale * pred[i] - gt[i]) / gt[i];
  out.relative_error = total / pred.size();
  return out;
}

Tensor render_error_map(const Tensor& error_map, const std::vector<std::uint8_t>& mask, double ceiling) {
  if (!(ceiling > 0)) throw UsageError("render_error_map: ceiling must be positive");
  if (error_map.rank() != 2) throw UsageError("render_error_map: error map must be [H,W]");
  const std::size_t plane = error_map.numel();
  if (!mask.empty() && mask.size() != plane) throw UsageError("render_error_map: mask size mismatch");
  Tensor rgb = Tensor::zeros({3, error_map.dim(0), error_map.dim(1)});
  auto out = rgb.values();
  for (std::size_t p = 0; p < plane; ++p) {
    if (!mask.empty() && !mask[p]) continue;
    const float t = static_cast<float>(std::clamp(error_map[p] / ceiling, 0.0, 1.0));
    out[p] = t;
    out[plane + p] = 0;
    out[2 * plane + p] = 1 - t;
  }
  return rgb;
}

nlohmann::json MetricReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"normal_mae_degrees", opt(normal_mae_degrees)},
          {"direction_mae_degrees", opt(direction_mae_degrees)},
          {"intensity_re_scale", opt(intensity_re_scale)},
          {"fitted_scale_s", opt(fitted_scale_s)},
          {"valid_pixel_count", valid_pixel_count}};
}

}  // namespace psnet
