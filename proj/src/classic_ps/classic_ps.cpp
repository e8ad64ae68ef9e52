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

#include "psnet/classic_ps.h"

#include <cmath>

#include <Eigen/Dense>

#include "psnet/errors.h"

namespace psnet {
namespace {

template <typename T>
L2Solution solve(const BasicTensor<T>& images, const std::vector<DirectionalLight>& lights,
                 const std::vector<std::uint8_t>& mask, double shadow_threshold) {
  if (images.rank() != 3 && images.rank() != 4) {
    throw UsageError("l2_solve: images must be [q,H,W] or [q,3,H,W], got " + shape_string(images.shape()));
  }
  const int q = images.dim(0);
  if (q < 3) throw UsageError("l2_solve: need at least 3 images, got " + std::to_string(q));
  if (static_cast<int>(lights.size()) != q) {
    throw UsageError("l2_solve: " + std::to_string(q) + " images but " + std::to_string(lights.size()) +
                     " lights");
  }
  const int channels = images.rank() == 4 ? images.dim(1) : 1;
  const int height = images.dim(-2), width = images.dim(-1);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  if (!mask.empty() && mask.size() != plane) throw UsageError("l2_solve: mask size does not match images");
  for (const auto& l : lights) {
    if (!(l.intensity > 0)) throw UsageError("l2_solve: light intensities must be positive");
  }

  L2Solution out{NormalMap(height, width), std::vector<double>(plane, 0.0)};
  auto v = images.values();
  Eigen::MatrixXd a(q, 3);
  Eigen::VectorXd b(q);
  for (std::size_t p = 0; p < plane; ++p) {
    if (!mask.empty() && !mask[p]) continue;
    int rows = 0;
    for (int i = 0; i < q; ++i) {
      double m = 0;
      for (int c = 0; c < channels; ++c) m += v[(static_cast<std::size_t>(i) * channels + c) * plane + p];
      m /= channels;
      if (m <= shadow_threshold) continue;
      a.row(rows) = lights[i].direction.transpose();
      b[rows] = m / lights[i].intensity;
      ++rows;
    }
    if (rows < 3) continue;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.topRows(rows));
    if (qr.rank() < 3) continue;
    const Eigen::Vector3d x = qr.solve(b.head(rows));
    const double rho = x.norm();
    if (!(rho > 0)) continue;
    out.normals.normals[p] = x / rho;
    out.normals.mask[p] = 1;
    out.albedo[p] = rho;
  }
  return out;
}

}  // namespace

L2Solution l2_solve(const Tensor& images, const std::vector<DirectionalLight>& lights,
                    const std::vector<std::uint8_t>& mask, double shadow_threshold) {
  return solve(images, lights, mask, shadow_threshold);
}

L2Solution l2_solve(const Tensor64& images, const std::vector<DirectionalLight>& lights,
                    const std::vector<std::uint8_t>& mask, double shadow_threshold) {
  return solve(images, lights, mask, shadow_threshold);
}

template <typename T>
BasicTensor<T> normalize_observations(const BasicTensor<T>& stack) {
  if (stack.rank() != 4) {
    throw UsageError("normalize_observations: expected [q,C,H,W], got " + shape_string(stack.shape()));
  }
  const int q = stack.dim(0);
  const std::size_t frame = stack.numel() / q;
  BasicTensor<T> out(stack.shape());
  auto in = stack.values();
  auto dst = out.values();
  for (std::size_t k = 0; k < frame; ++k) {
    double sum = 0;
    for (int i = 0; i < q; ++i) {
      const double m = in[i * frame + k];
      sum += m * m;
    }
    if (sum == 0) continue;
    const double norm = std::sqrt(sum);
    for (int i = 0; i < q; ++i) dst[i * frame + k] = static_cast<T>(in[i * frame + k] / norm);
  }
  return out;
}

template <typename T>
BasicTensor<T> test_time_rescale(const BasicTensor<T>& stack, int test_count, int train_count) {
  if (test_count < 1 || train_count < 1) throw UsageError("test_time_rescale: image counts must be >= 1");
  const double factor = std::sqrt(static_cast<double>(test_count) / train_count);
  BasicTensor<T> out(stack.shape());
  auto in = stack.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<T>(in[i] * factor);
  return out;
}

template Tensor normalize_observations(const Tensor&);
template Tensor64 normalize_observations(const Tensor64&);
template Tensor test_time_rescale(const Tensor&, int, int);
template Tensor64 test_time_rescale(const Tensor64&, int, int);

Eigen::Matrix3d GBRMatrix::matrix() const {
  Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
  g.row(2) << mu, nu, lambda;
  return g;
}

GBRScene gbr_transform(const NormalMap& normals, const std::vector<double>& albedo,
                       const std::vector<DirectionalLight>& lights, const GBRMatrix& g) {
  if (!(std::abs(g.lambda) > 1e-12)) throw UsageError("gbr_transform: singular GBR matrix (lambda = 0)");
  if (albedo.size() != normals.pixel_count()) throw UsageError("gbr_transform: albedo size mismatch");
  const Eigen::Matrix3d gm = g.matrix();
  const Eigen::Matrix3d inv_t = gm.inverse().transpose();
  GBRScene out{normals, albedo, {}};
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) {
    if (!normals.mask[p]) continue;
    const Eigen::Vector3d b = inv_t * normals.normals[p];
    const double len = b.norm();
    out.normals.normals[p] = b / len;
    out.albedo[p] = albedo[p] * len;
  }
  out.lights.reserve(lights.size());
  for (const auto& l : lights) {
    const Eigen::Vector3d s = gm * l.direction;
    const double len = s.norm();
    out.lights.push_back({s / len, l.intensity * len});
  }
  return out;
}

}  // namespace psnet
