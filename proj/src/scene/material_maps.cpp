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

MaterialMap make_material_map(MaterialMapKind kind, int resolution, std::uint64_t seed) {
  if (resolution < 1) throw UsageError("make_material_map: resolution must be positive");
  MaterialMap map{resolution, resolution, std::vector<double>(static_cast<std::size_t>(resolution) * resolution)};
  switch (kind) {
    case MaterialMapKind::kRamp:
      for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
          map.weights[r * resolution + c] = resolution > 1 ? static_cast<double>(c) / (resolution - 1) : 0.0;
        }
      }
      break;
    case MaterialMapKind::kChecker:
      for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) map.weights[r * resolution + c] = ((r / 8 + c / 8) % 2) ? 1.0 : 0.0;
      }
      break;
    case MaterialMapKind::kIrregular: {
      // Sum of a few low-frequency plane waves, thresholded at zero.
      struct Wave {
        double fx, fy, phase;
      };
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> unit(0, 1);
      std::vector<Wave> waves;
      for (int i = 0; i < 6; ++i) {
        const double angle = 2 * std::numbers::pi * unit(rng);
        const double freq = 1.0 + 3.0 * unit(rng);
        waves.push_back({freq * std::cos(angle), freq * std::sin(angle), 2 * std::numbers::pi * unit(rng)});
      }
      for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
          const double x = (c + 0.5) / resolution, y = (r + 0.5) / resolution;
          double v = 0;
          for (const Wave& w : waves) v += std::sin(2 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
          map.weights[r * resolution + c] = v > 0 ? 1.0 : 0.0;
        }
      }
      break;
    }
  }
  return map;
}

}  // namespace psnet
