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

#include "doctest.h"
#include "psnet/errors.h"
#include "psnet/lighting_grid.h"
#include "psnet/scene.h"

using namespace psnet;

namespace {

double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)) * 180 / std::numbers::pi;
}

}  // namespace

TEST_CASE("lighting grid: bin widths") {
  LightingGrid grid;
  CHECK(grid.angle_bin_width() == 5.0);
  CHECK(grid.max_deviation_deg() == 2.5);
  CHECK(grid.intensity_bin_width() == doctest::Approx(0.09));
  CHECK_THROWS_AS((LightingGrid{0, 20, 0.2, 2.0}.validate()), ConfigError);
  CHECK_THROWS_AS((LightingGrid{36, 20, 2.0, 2.0}.validate()), ConfigError);
}

TEST_CASE("discretize_direction: examples") {
  LightingGrid grid;
  DirectionBins zenith = discretize_direction({0, 0, 1}, grid);
  CHECK(zenith.azimuth == 18);
  CHECK(zenith.elevation == 18);
  CHECK(discretize_direction(direction_from_angles({91, 0}), grid).azimuth == 18);
  CHECK(discretize_direction({-1, 0, 0}, grid).azimuth == 35);
  CHECK(discretize_direction({1, 0, 0}, grid).azimuth == 0);
  CHECK(discretize_direction({0, -1, 0}, grid).elevation == 0);
  CHECK(discretize_direction({0, 1, 0}, grid).elevation == 35);
  CHECK_THROWS_AS(discretize_direction({0, 0, -0.1}, grid), UsageError);
  CHECK_NOTHROW(discretize_direction(Eigen::Vector3d(1, 0, -1e-7).normalized(), grid));
}

TEST_CASE("decode_direction: bin middles") {
  LightingGrid grid;
  const Eigen::Vector3d d = decode_direction(18, 18, grid);
  const LightAngles a = angles_from_direction(d);
  CHECK(a.azimuth_deg == doctest::Approx(92.5));
  CHECK(a.elevation_deg == doctest::Approx(2.5));
  CHECK(d.norm() == doctest::Approx(1));
  CHECK_THROWS_AS(decode_direction(36, 0, grid), UsageError);
  CHECK_THROWS_AS(decode_direction(0, -1, grid), UsageError);
}

TEST_CASE("discretize after decode is the identity on bins") {
  for (int k : {6, 36, 72}) {
    LightingGrid grid{k, 20, 0.2, 2.0};
    for (int a = 0; a < k; ++a) {
      for (int e = 0; e < k; ++e) {
        DirectionBins b = discretize_direction(decode_direction(a, e, grid), grid);
        CHECK(b.azimuth == a);
        CHECK(b.elevation == e);
      }
    }
  }
  LightingGrid grid;
  for (int b = 0; b < grid.intensity_bins; ++b) {
    IntensityBin back = discretize_intensity(decode_intensity(b, grid), grid);
    CHECK(back.bin == b);
    CHECK_FALSE(back.clamped);
  }
}

TEST_CASE("round-trip direction error never exceeds the worst cell corner") {
  LightingGrid grid;
  const double w = grid.angle_bin_width();
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0, 1);
  double overall = 0;
  for (int i = 0; i < 100000; ++i) {
    Eigen::Vector3d l(g(rng), g(rng), g(rng));
    l.z() = std::abs(l.z());
    l.normalize();
    const DirectionBins b = discretize_direction(l, grid);
    const Eigen::Vector3d centre = decode_direction(b.azimuth, b.elevation, grid);
    double bound = 0;
    for (int da : {0, 1}) {
      for (int de : {0, 1}) {
        const Eigen::Vector3d corner = direction_from_angles({(b.azimuth + da) * w, (b.elevation + de) * w - 90});
        bound = std::max(bound, angle_deg(corner, centre));
      }
    }
    const double err = angle_deg(l, centre);
    overall = std::max(overall, err);
    CHECK(err <= bound + 1e-9);
  }
  // No cell is worse than the diagonal of a 5 x 5 degree patch at the equator.
  CHECK(overall <= 2.5 * std::sqrt(2.0) + 1e-6);
}

TEST_CASE("intensity bins") {
  LightingGrid grid;
  CHECK(discretize_intensity(0.2, grid).bin == 0);
  CHECK(decode_intensity(0, grid) == doctest::Approx(0.245));
  CHECK(discretize_intensity(1.0, grid).bin == 8);
  CHECK(decode_intensity(8, grid) == doctest::Approx(0.965));
  CHECK(discretize_intensity(2.0, grid).bin == 19);
  IntensityBin low = discretize_intensity(0.05, grid);
  CHECK(low.bin == 0);
  CHECK(low.clamped);
  IntensityBin high = discretize_intensity(3.0, grid);
  CHECK(high.bin == 19);
  CHECK(high.clamped);
  CHECK_THROWS_AS(decode_intensity(20, grid), UsageError);
  for (int i = 0; i <= 1800; ++i) {
    const double e = 0.2 + i * 0.001;
    CHECK(std::abs(e - decode_intensity(discretize_intensity(e, grid).bin, grid)) <= 0.045 + 1e-12);
  }
}
