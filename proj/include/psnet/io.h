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

#ifndef PSNET_IO_H_
#define PSNET_IO_H_

// File formats: Portable Float Map images, light lists as CSV and the
// binary checkpoint container.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "psnet/scene.h"
#include "psnet/tensor.h"

namespace psnet {

// PFM, little-endian, rows stored bottom-up. Images are [C,H,W] with C 1 or
// 3; [H,W] is written as one channel. Reading returns [C,H,W].
std::string encode_pfm(const Tensor& image);
Tensor decode_pfm(std::string_view bytes);
void write_pfm(const std::string& path, const Tensor& image);
Tensor read_pfm(const std::string& path);

// One `lx,ly,lz,e` row per light. Directions are normalized on read; rows
// pointing into the lower hemisphere are rejected. Blank lines and lines
// starting with '#' are skipped.
std::string format_lights(const std::vector<DirectionalLight>& lights);
std::vector<DirectionalLight> parse_lights(std::string_view text);
void write_lights(const std::string& path, const std::vector<DirectionalLight>& lights);
std::vector<DirectionalLight> read_lights(const std::string& path);

// Normal maps as a 3-channel PFM plus a 1-channel {0,1} mask PFM.
void write_normal_map(const std::string& normal_path, const std::string& mask_path, const NormalMap& map);
NormalMap read_normal_map(const std::string& normal_path, const std::string& mask_path = "");

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// "NFCK", u32 version, u64 header length, JSON header, float32 payload.
// The header holds `kind`, free-form `meta` and the tensor table
// (name, shape, offset, length; offsets and lengths in elements).
struct CheckpointFile {
  std::string kind;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const CheckpointFile& file);
// Validates the whole tensor table against the payload before building any
// tensor.
CheckpointFile decode_checkpoint(std::string_view bytes);
void write_checkpoint_file(const std::string& path, const CheckpointFile& file);
CheckpointFile read_checkpoint_file(const std::string& path);

// Whole-file helpers; throw DataError when the file cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace psnet

#endif  // PSNET_IO_H_
