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
#include <random>

#include "psnet/errors.h"
#include "psnet/training.h"

namespace psnet {
namespace {

constexpr int kCropAttempts = 20;

struct Axis {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> frac;
};

// Pixel-centre aligned source coordinates for each output index.
Axis sample_axis(int in, int out) {
  Axis a;
  const double ratio = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double x = (i + 0.5) * ratio - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(x));
    a.lo.push_back(lo);
    a.hi.push_back(std::min(lo + 1, in - 1));
    a.frac.push_back(x - lo);
  }
  return a;
}

template <typename Get>
double bilinear(const Axis& ay, const Axis& ax, int y, int x, Get get) {
  const double fy = ay.frac[y], fx = ax.frac[x];
  const double top = (1 - fx) * get(ay.lo[y], ax.lo[x]) + fx * get(ay.lo[y], ax.hi[x]);
  const double bottom = (1 - fx) * get(ay.hi[y], ax.lo[x]) + fx * get(ay.hi[y], ax.hi[x]);
  return (1 - fy) * top + fy * bottom;
}

NormalMap resize_normals(const NormalMap& map, int height, int width) {
  const Axis ay = sample_axis(map.height, height);
  const Axis ax = sample_axis(map.width, width);
  NormalMap out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double m = bilinear(ay, ax, y, x, [&](int r, int c) { return double(map.mask[r * map.width + c]); });
      Eigen::Vector3d n;
      for (int k = 0; k < 3; ++k) {
        n[k] = bilinear(ay, ax, y, x, [&](int r, int c) { return map.normals[r * map.width + c][k]; });
      }
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      if (m >= 0.5 && n.norm() > 1e-8) {
        out.normals[p] = n.normalized();
        out.mask[p] = 1;
      } else {
        out.normals[p] = Eigen::Vector3d::Zero();
        out.mask[p] = 0;
      }
    }
  }
  return out;
}

Tensor crop_images(const Tensor& images, int top, int left, int size) {
  const int q = images.dim(0), c = images.dim(1), h = images.dim(2), w = images.dim(3);
  Tensor out({q, c, size, size});
  auto src = images.values();
  auto dst = out.values();
  std::size_t o = 0;
  for (int i = 0; i < q * c; ++i) {
    const float* plane = src.data() + static_cast<std::size_t>(i) * h * w;
    for (int y = 0; y < size; ++y) {
      const float* row = plane + static_cast<std::size_t>(top + y) * w + left;
      std::copy(row, row + size, dst.data() + o);
      o += size;
    }
  }
  return out;
}

NormalMap crop_normals(const NormalMap& map, int top, int left, int size) {
  NormalMap out(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const std::size_t s = static_cast<std::size_t>(top + y) * map.width + left + x;
      out.normals[y * size + x] = map.normals[s];
      out.mask[y * size + x] = map.mask[s];
    }
  }
  return out;
}

double foreground_fraction(const NormalMap& map, int top, int left, int size) {
  std::size_t count = 0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) count += map.mask[static_cast<std::size_t>(top + y) * map.width + left + x];
  }
  return static_cast<double>(count) / (static_cast<double>(size) * size);
}

}  // namespace

Tensor resize_bilinear(const Tensor& image, int height, int width) {
  if (image.rank() != 3) throw UsageError("resize_bilinear: expected [C,H,W], got " + shape_string(image.shape()));
  if (height < 1 || width < 1) throw UsageError("resize_bilinear: output size must be positive");
  const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const Axis ay = sample_axis(h, height);
  const Axis ax = sample_axis(w, width);
  Tensor out({c, height, width});
  auto src = image.values();
  auto dst = out.values();
  for (int k = 0; k < c; ++k) {
    const float* plane = src.data() + static_cast<std::size_t>(k) * h * w;
    float* target = dst.data() + static_cast<std::size_t>(k) * height * width;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        target[y * width + x] = static_cast<float>(
            bilinear(ay, ax, y, x, [&](int r, int col) { return double(plane[r * w + col]); }));
      }
    }
  }
  return out;
}

TrainingInstance augment(const RenderedSample& sample, const AugmentOptions& options, std::uint64_t seed) {
  const Tensor& images = sample.images;
  if (images.rank() != 4 || images.dim(1) != 3) {
    throw UsageError("augment: images must be [q,3,H,W], got " + shape_string(images.shape()));
  }
  const int q = images.dim(0), h = images.dim(2), w = images.dim(3);
  if (static_cast<int>(sample.lights.size()) != q) throw UsageError("augment: light count does not match images");
  if (sample.normal_map.height != h || sample.normal_map.width != w) {
    throw UsageError("augment: normal map size does not match images");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);

  TrainingInstance out;
  out.images = images.clone();
  out.lights = sample.lights;
  out.normals = sample.normal_map;

  if (options.intensity_scaling) {
    const std::size_t frame = static_cast<std::size_t>(3) * h * w;
    auto v = out.images.values();
    for (int i = 0; i < q; ++i) {
      const double e = options.intensity_min + (options.intensity_max - options.intensity_min) * unit(rng);
      const float factor = static_cast<float>(e / out.lights[i].intensity);
      for (std::size_t j = 0; j < frame; ++j) v[i * frame + j] *= factor;
      out.lights[i].intensity = e;
    }
  }

  if (options.rescale) {
    if (options.min_size < 1 || options.max_size < options.min_size) {
      throw UsageError("augment: invalid rescale range");
    }
    std::uniform_int_distribution<int> size(options.min_size, options.max_size);
    const int nh = size(rng);
    const int nw = size(rng);
    Tensor resized({q, 3, nh, nw});
    const std::size_t in_frame = static_cast<std::size_t>(3) * h * w;
    const std::size_t out_frame = static_cast<std::size_t>(3) * nh * nw;
    for (int i = 0; i < q; ++i) {
      Tensor frame({3, h, w}, std::vector<float>(out.images.values().begin() + i * in_frame,
                                                 out.images.values().begin() + (i + 1) * in_frame));
      const Tensor r = resize_bilinear(frame, nh, nw);
      std::copy(r.values().begin(), r.values().end(), resized.values().begin() + i * out_frame);
    }
    out.images = resized;
    out.normals = resize_normals(out.normals, nh, nw);
  }

  if (options.crop) {
    const int size = options.crop_size;
    const int ch = out.images.dim(2), cw = out.images.dim(3);
    if (ch < size || cw < size) {
      throw UsageError("augment: " + std::to_string(ch) + "x" + std::to_string(cw) + " is smaller than the " +
                       std::to_string(size) + " crop");
    }
    std::uniform_int_distribution<int> row(0, ch - size);
    std::uniform_int_distribution<int> col(0, cw - size);
    int best_top = 0, best_left = 0;
    double best = -1;
    for (int attempt = 0; attempt < kCropAttempts; ++attempt) {
      const int top = row(rng);
      const int left = col(rng);
      const double f = foreground_fraction(out.normals, top, left, size);
      if (f > best) {
        best = f;
        best_top = top;
        best_left = left;
      }
      if (f >= options.min_foreground) break;
    }
    out.images = crop_images(out.images, best_top, best_left, size);
    out.normals = crop_normals(out.normals, best_top, best_left, size);
    out.crop_top = best_top;
    out.crop_left = best_left;
  }

  if (options.noise) {
    const int oh = out.images.dim(2), ow = out.images.dim(3);
    const std::size_t plane = static_cast<std::size_t>(oh) * ow;
    const double a = options.noise_amplitude;
    auto v = out.images.values();
    for (int i = 0; i < q * 3; ++i) {
      for (std::size_t p = 0; p < plane; ++p) {
        if (!out.normals.mask[p]) continue;
        v[i * plane + p] += static_cast<float>(a * (2 * unit(rng) - 1));
      }
    }
  }
  return out;
}

double learning_rate(double initial_lr, int epoch, int halving_period) {
  if (halving_period < 1) throw UsageError("learning_rate: halving period must be positive");
  return initial_lr / std::ldexp(1.0, epoch / halving_period);
}

}  // namespace psnet
