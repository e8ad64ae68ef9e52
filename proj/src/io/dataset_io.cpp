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

#include <cstdio>
#include <filesystem>

#include "psnet/dataset.h"
#include "psnet/errors.h"
#include "psnet/io.h"

namespace psnet {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kDatasetVersion = 1;

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json base_json(const BaseBRDF& b) {
  if (const auto* l = std::get_if<Lambertian>(&b)) {
    if (!l->albedo_map.empty()) throw UsageError("brdf_to_json: per-pixel albedo maps are not serializable");
    return {{"type", "lambertian"}, {"albedo", vec_json(l->albedo)}};
  }
  const auto& p = std::get<BlinnPhong>(b);
  return {{"type", "blinn_phong"}, {"diffuse", vec_json(p.diffuse)}, {"specular", p.specular},
          {"shininess", p.shininess}};
}

BaseBRDF base_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "lambertian") return Lambertian{vec_from(j.at("albedo")), {}};
  if (type == "blinn_phong") {
    return BlinnPhong{vec_from(j.at("diffuse")), j.at("specular").get<double>(), j.at("shininess").get<double>()};
  }
  throw DataError("unknown BRDF type '" + type + "'");
}

std::string numbered(const char* pattern, int n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, n);
  return buf;
}

}  // namespace

json to_json(const DatasetSpec& spec) {
  json shapes = json::array(), materials = json::array();
  for (auto s : spec.shapes) shapes.push_back(to_string(s));
  for (auto m : spec.materials) materials.push_back(to_string(m));
  return {{"sample_count", spec.sample_count},
          {"resolution", spec.resolution},
          {"lights_per_sample", spec.lights_per_sample},
          {"azimuth_span_deg", spec.lights.azimuth_span_deg},
          {"elevation_span_deg", spec.lights.elevation_span_deg},
          {"intensity_range", {spec.lights.intensity_min, spec.lights.intensity_max}},
          {"shapes", shapes},
          {"materials", materials},
          {"blend_map", to_string(spec.blend_map)},
          {"cast_shadow", spec.cast_shadow},
          {"validation_fraction", spec.validation_fraction}};
}

DatasetSpec dataset_spec_from_json(const json& j) {
  DatasetSpec spec;
  try {
    spec.sample_count = j.value("sample_count", spec.sample_count);
    spec.resolution = j.value("resolution", spec.resolution);
    spec.lights_per_sample = j.value("lights_per_sample", spec.lights_per_sample);
    spec.lights.azimuth_span_deg = j.value("azimuth_span_deg", spec.lights.azimuth_span_deg);
    spec.lights.elevation_span_deg = j.value("elevation_span_deg", spec.lights.elevation_span_deg);
    if (j.contains("intensity_range")) {
      spec.lights.intensity_min = j.at("intensity_range").at(0).get<double>();
      spec.lights.intensity_max = j.at("intensity_range").at(1).get<double>();
    }
    if (j.contains("shapes")) {
      spec.shapes.clear();
      for (const auto& s : j.at("shapes")) spec.shapes.push_back(shape_kind_from_string(s.get<std::string>()));
    }
    if (j.contains("materials")) {
      spec.materials.clear();
      for (const auto& m : j.at("materials")) spec.materials.push_back(material_kind_from_string(m.get<std::string>()));
    }
    if (j.contains("blend_map")) spec.blend_map = material_map_kind_from_string(j.at("blend_map").get<std::string>());
    spec.cast_shadow = j.value("cast_shadow", spec.cast_shadow);
    spec.validation_fraction = j.value("validation_fraction", spec.validation_fraction);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

json brdf_to_json(const BRDFModel& brdf) {
  if (const auto* l = std::get_if<Lambertian>(&brdf)) return base_json(*l);
  if (const auto* p = std::get_if<BlinnPhong>(&brdf)) return base_json(*p);
  const auto& b = std::get<Blend>(brdf);
  return {{"type", "blend"},
          {"first", base_json(b.first)},
          {"second", base_json(b.second)},
          {"material", {{"height", b.material.height}, {"width", b.material.width}, {"weights", b.material.weights}}}};
}

BRDFModel brdf_from_json(const json& j) {
  try {
    if (j.at("type").get<std::string>() != "blend") {
      BaseBRDF base = base_from(j);
      if (auto* l = std::get_if<Lambertian>(&base)) return *l;
      return std::get<BlinnPhong>(base);
    }
    const json& m = j.at("material");
    MaterialMap map{m.at("height").get<int>(), m.at("width").get<int>(), m.at("weights").get<std::vector<double>>()};
    if (map.weights.size() != static_cast<std::size_t>(map.height) * map.width) {
      throw DataError("blend material map size mismatch");
    }
    return Blend{base_from(j.at("first")), base_from(j.at("second")), std::move(map)};
  } catch (const json::exception& e) {
    throw DataError(std::string("bad BRDF descriptor: ") + e.what());
  }
}

void generate_dataset(const DatasetSpec& spec, std::uint64_t seed, const std::string& directory) {
  spec.validate();
  fs::create_directories(directory);
  const DatasetSplit split = split_dataset(spec.sample_count, spec.validation_fraction, seed);
  json manifest{{"format", "psnet-dataset"}, {"version", kDatasetVersion}, {"seed", seed}, {"spec", to_json(spec)},
                {"validation", split.validation}, {"samples", json::array()}};
  for (int i = 0; i < spec.sample_count; ++i) {
    const SceneDescription scene = describe_scene(spec, seed, i);
    const RenderedSample sample = render_scene(spec, scene);
    const std::string name = numbered("sample_%04d", i);
    const fs::path dir = fs::path(directory) / name;
    fs::create_directories(dir);
    json images = json::array();
    const int q = sample.images.dim(0);
    const std::size_t frame = sample.images.numel() / q;
    for (int k = 0; k < q; ++k) {
      const std::string file = numbered("img_%03d.pfm", k);
      Tensor img({3, spec.resolution, spec.resolution});
      std::copy_n(sample.images.values().begin() + k * frame, frame, img.values().begin());
      write_pfm((dir / file).string(), img);
      images.push_back(file);
    }
    write_lights((dir / "lights.csv").string(), sample.lights);
    write_normal_map((dir / "normal.pfm").string(), (dir / "mask.pfm").string(), sample.normal_map);
    manifest["samples"].push_back({{"dir", name},
                                   {"images", images},
                                   {"lights", "lights.csv"},
                                   {"normal", "normal.pfm"},
                                   {"mask", "mask.pfm"},
                                   {"shape", to_string(scene.shape)},
                                   {"shape_seed", scene.shape_seed},
                                   {"brdf", brdf_to_json(scene.brdf)}});
  }
  write_file((fs::path(directory) / "manifest.json").string(), manifest.dump(1));
}

DiskSource::DiskSource(std::string directory) : root_(std::move(directory)) {
  const std::string path = (fs::path(root_) / "manifest.json").string();
  json manifest;
  try {
    manifest = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
  try {
    if (manifest.value("format", "") != "psnet-dataset") throw DataError(path + ": not a dataset manifest");
    if (manifest.value("version", 0) != kDatasetVersion) throw DataError(path + ": unsupported manifest version");
    for (const auto& s : manifest.at("samples")) {
      Entry e;
      e.directory = (fs::path(root_) / s.at("dir").get<std::string>()).string();
      e.images = s.at("images").get<std::vector<std::string>>();
      e.lights = s.at("lights").get<std::string>();
      e.normal = s.at("normal").get<std::string>();
      e.mask = s.value("mask", "");
      e.brdf = s.contains("brdf") ? brdf_from_json(s.at("brdf")) : BRDFModel(Lambertian{});
      if (e.images.empty()) throw DataError(e.directory + ": no images listed");
      for (const auto& f : e.images) {
        if (!fs::exists(fs::path(e.directory) / f)) throw DataError(e.directory + ": missing image " + f);
      }
      samples_.push_back(std::move(e));
    }
    std::vector<int> validation = manifest.value("validation", std::vector<int>{});
    std::vector<bool> is_val(samples_.size(), false);
    for (int v : validation) {
      if (v < 0 || v >= size()) throw DataError(path + ": validation index out of range");
      is_val[v] = true;
      split_.validation.push_back(v);
    }
    for (int i = 0; i < size(); ++i) {
      if (!is_val[i]) split_.train.push_back(i);
    }
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (samples_.empty()) throw DataError(path + ": no samples");
  const Tensor first = read_pfm((fs::path(samples_[0].directory) / samples_[0].normal).string());
  resolution_ = first.dim(1);
}

int DiskSource::lights_per_sample(int index) const { return static_cast<int>(samples_.at(index).images.size()); }

RenderedSample DiskSource::load(int index, const std::vector<int>& light_indices) const {
  if (index < 0 || index >= size()) throw UsageError("DiskSource: sample index out of range");
  const Entry& e = samples_[index];
  const fs::path dir(e.directory);
  const auto all_lights = read_lights((dir / e.lights).string());
  if (all_lights.size() != e.images.size()) {
    throw DataError(e.directory + ": " + std::to_string(e.images.size()) + " images but " +
                    std::to_string(all_lights.size()) + " lights");
  }
  std::vector<int> chosen = light_indices;
  if (chosen.empty()) {
    for (int i = 0; i < static_cast<int>(e.images.size()); ++i) chosen.push_back(i);
  }
  RenderedSample sample;
  sample.brdf = e.brdf;
  sample.normal_map = read_normal_map((dir / e.normal).string(), e.mask.empty() ? "" : (dir / e.mask).string());
  const int h = sample.normal_map.height, w = sample.normal_map.width;
  sample.images = Tensor({static_cast<int>(chosen.size()), 3, h, w});
  const std::size_t frame = static_cast<std::size_t>(3) * h * w;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const int i = chosen[k];
    if (i < 0 || i >= static_cast<int>(e.images.size())) throw UsageError("DiskSource: light index out of range");
    Tensor img = read_pfm((dir / e.images[i]).string());
    if (img.dim(1) != h || img.dim(2) != w) throw DataError(e.directory + ": image size differs from the normal map");
    if (img.dim(0) == 1) {
      for (int c = 0; c < 3; ++c) std::copy_n(img.values().begin(), frame / 3, sample.images.values().begin() + k * frame + c * frame / 3);
    } else {
      std::copy_n(img.values().begin(), frame, sample.images.values().begin() + k * frame);
    }
    sample.lights.push_back(all_lights[i]);
  }
  return sample;
}

}  // namespace psnet
