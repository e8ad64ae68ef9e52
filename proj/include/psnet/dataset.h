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

#ifndef PSNET_DATASET_H_
#define PSNET_DATASET_H_

// Procedural training scenes and their on-disk layout.
//
// A scene is fully determined by (spec, seed, index): its shape, BRDF and
// the 64 candidate lights. Renders can be produced for any subset of those
// lights, so training never needs the whole stack in memory.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "psnet/scene.h"

namespace psnet {

enum class ShapeKind { kSphere, kBumps, kSinusoid, kPlane };
enum class MaterialKind { kLambertian, kBlinnPhong, kBlend };

std::string to_string(ShapeKind kind);
std::string to_string(MaterialKind kind);
std::string to_string(MaterialMapKind kind);
// Throw ConfigError on unknown names.
ShapeKind shape_kind_from_string(const std::string& name);
MaterialKind material_kind_from_string(const std::string& name);
MaterialMapKind material_map_kind_from_string(const std::string& name);

struct DatasetSpec {
  int sample_count = 200;
  int resolution = 128;
  int lights_per_sample = 64;
  LightSampling lights;
  // Each scene draws one entry uniformly from each list.
  std::vector<ShapeKind> shapes{ShapeKind::kSphere, ShapeKind::kBumps};
  std::vector<MaterialKind> materials{MaterialKind::kLambertian, MaterialKind::kBlinnPhong};
  MaterialMapKind blend_map = MaterialMapKind::kChecker;
  bool cast_shadow = false;
  double validation_fraction = 0.01;

  // Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

nlohmann::json brdf_to_json(const BRDFModel& brdf);
BRDFModel brdf_from_json(const nlohmann::json& j);

struct SceneDescription {
  ShapeKind shape = ShapeKind::kSphere;
  std::uint64_t shape_seed = 0;
  BRDFModel brdf;
  std::vector<DirectionalLight> lights;
};

SceneDescription describe_scene(const DatasetSpec& spec, std::uint64_t seed, int index);
HeightField scene_height_field(ShapeKind shape, std::uint64_t shape_seed);
NormalMap scene_normal_map(ShapeKind shape, std::uint64_t shape_seed, int resolution);

// Renders the selected lights (all when `light_indices` is empty), noise
// free.
RenderedSample render_scene(const DatasetSpec& spec, const SceneDescription& scene,
                            const std::vector<int>& light_indices = {});

// Indices of the validation samples: round(fraction * count) of them,
// chosen by `seed`; the rest train.
struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> validation;
};
DatasetSplit split_dataset(int sample_count, double validation_fraction, std::uint64_t seed);

class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual int size() const = 0;
  virtual int lights_per_sample(int index) const = 0;
  virtual int resolution() const = 0;
  // Images for the chosen light indices (all when empty), with their lights,
  // normals and BRDF.
  virtual RenderedSample load(int index, const std::vector<int>& light_indices = {}) const = 0;
  virtual const DatasetSplit& split() const = 0;
};

class ProceduralSource : public SampleSource {
 public:
  ProceduralSource(DatasetSpec spec, std::uint64_t seed);

  int size() const override { return spec_.sample_count; }
  int lights_per_sample(int) const override { return spec_.lights_per_sample; }
  int resolution() const override { return spec_.resolution; }
  RenderedSample load(int index, const std::vector<int>& light_indices = {}) const override;
  const DatasetSplit& split() const override { return split_; }
  const DatasetSpec& spec() const { return spec_; }

 private:
  DatasetSpec spec_;
  std::uint64_t seed_;
  DatasetSplit split_;
};

// Reads a directory written by generate_dataset (or laid out the same way).
class DiskSource : public SampleSource {
 public:
  // Throws DataError on a missing or inconsistent manifest.
  explicit DiskSource(std::string directory);

  int size() const override { return static_cast<int>(samples_.size()); }
  int lights_per_sample(int index) const override;
  int resolution() const override { return resolution_; }
  RenderedSample load(int index, const std::vector<int>& light_indices = {}) const override;
  const DatasetSplit& split() const override { return split_; }

 private:
  struct Entry {
    std::string directory;
    std::vector<std::string> images;
    std::string lights;
    std::string normal;
    std::string mask;
    BRDFModel brdf;
  };
  std::string root_;
  std::vector<Entry> samples_;
  int resolution_ = 0;
  DatasetSplit split_;
};

// Writes DIR/manifest.json and DIR/sample_NNNN/{img_NNN.pfm, lights.csv,
// normal.pfm, mask.pfm}. Deterministic in (spec, seed).
void generate_dataset(const DatasetSpec& spec, std::uint64_t seed, const std::string& directory);

}  // namespace psnet

#endif  // PSNET_DATASET_H_
