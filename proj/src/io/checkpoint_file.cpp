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

#include <cstring>

#include "psnet/errors.h"
#include "psnet/io.h"

namespace psnet {
namespace {

constexpr char kMagic[4] = {'N', 'F', 'C', 'K'};
constexpr std::size_t kPreamble = 4 + sizeof(std::uint32_t) + sizeof(std::uint64_t);

template <typename N>
void put(std::string& out, N value) {
  char buf[sizeof(N)];
  std::memcpy(buf, &value, sizeof(N));
  out.append(buf, sizeof(N));
}

template <typename N>
N get(std::string_view bytes, std::size_t pos) {
  N value;
  std::memcpy(&value, bytes.data() + pos, sizeof(N));
  return value;
}

struct TableEntry {
  std::string name;
  Shape shape;
  std::size_t offset;
  std::size_t length;
};

}  // namespace

std::string encode_checkpoint(const CheckpointFile& file) {
  nlohmann::json header;
  header["kind"] = file.kind;
  header["meta"] = file.meta;
  header["tensors"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : file.tensors) {
    header["tensors"].push_back(
        {{"name", t.name}, {"shape", t.tensor.shape()}, {"offset", offset}, {"length", t.tensor.numel()}});
    offset += t.tensor.numel();
  }
  const std::string text = header.dump();
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset * sizeof(float));
  for (const auto& t : file.tensors) {
    out.append(reinterpret_cast<const char*>(t.tensor.values().data()), t.tensor.numel() * sizeof(float));
  }
  return out;
}

CheckpointFile decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kPreamble) throw ParseError("checkpoint: file too short", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError("checkpoint: bad magic", 0);
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version), 4);
  }
  const auto header_len = get<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - kPreamble) throw ParseError("checkpoint: header runs past end of file", 8);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(kPreamble, header_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("checkpoint: malformed header: ") + e.what(), kPreamble + e.byte);
  }
  const std::size_t payload_start = kPreamble + header_len;
  const std::size_t payload_bytes = bytes.size() - payload_start;
  if (payload_bytes % sizeof(float) != 0) {
    throw ParseError("checkpoint: payload is not a whole number of float32 values", bytes.size());
  }
  const std::size_t payload_len = payload_bytes / sizeof(float);

  // Validate the whole table first.
  std::vector<TableEntry> table;
  try {
    std::size_t expected = 0;
    for (const auto& e : header.at("tensors")) {
      TableEntry t{e.at("name").get<std::string>(), e.at("shape").get<Shape>(), e.at("offset").get<std::size_t>(),
                   e.at("length").get<std::size_t>()};
      for (int d : t.shape) {
        if (d < 1) throw ParseError("checkpoint: non-positive dimension in '" + t.name + "'", kPreamble);
      }
      if (t.length != shape_numel(t.shape)) {
        throw ParseError("checkpoint: tensor '" + t.name + "' length does not match its shape", kPreamble);
      }
      if (t.offset != expected) {
        throw ParseError("checkpoint: tensor '" + t.name + "' offset " + std::to_string(t.offset) +
                             " leaves a gap or overlap (expected " + std::to_string(expected) + ")",
                         kPreamble);
      }
      expected += t.length;
      if (expected > payload_len) {
        throw ParseError("checkpoint: tensor '" + t.name + "' runs past the payload", bytes.size());
      }
      table.push_back(std::move(t));
    }
    if (expected != payload_len) {
      throw ParseError("checkpoint: " + std::to_string(payload_len - expected) + " unclaimed payload values",
                       payload_start + expected * sizeof(float));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: bad tensor table: ") + e.what(), kPreamble);
  }

  CheckpointFile file;
  try {
    file.kind = header.at("kind").get<std::string>();
    file.meta = header.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: bad header: ") + e.what(), kPreamble);
  }
  for (const auto& t : table) {
    Tensor tensor(t.shape);
    std::memcpy(tensor.values().data(), bytes.data() + payload_start + t.offset * sizeof(float),
                t.length * sizeof(float));
    file.tensors.push_back({t.name, tensor});
  }
  return file;
}

void write_checkpoint_file(const std::string& path, const CheckpointFile& file) {
  write_file(path, encode_checkpoint(file));
}

CheckpointFile read_checkpoint_file(const std::string& path) { return decode_checkpoint(read_file(path)); }

}  // namespace psnet
