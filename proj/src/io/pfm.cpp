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

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "psnet/errors.h"
#include "psnet/io.h"

namespace psnet {
namespace {

static_assert(std::endian::native == std::endian::little, "PFM and checkpoint code assume a little-endian host");

// Reads one whitespace-delimited header token starting at `pos`.
std::string_view next_token(std::string_view bytes, std::size_t& pos, const char* what) {
  while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw ParseError(std::string("PFM: missing ") + what, start);
  return bytes.substr(start, pos - start);
}

template <typename N>
N parse_number(std::string_view bytes, std::string_view token, const char* what) {
  const std::size_t pos = static_cast<std::size_t>(token.data() - bytes.data());
  N value{};
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw ParseError(std::string("PFM: bad ") + what + " '" + std::string(token) + "'", pos);
  }
  return value;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string encode_pfm(const Tensor& image) {
  int c = 1, h = 0, w = 0;
  if (image.rank() == 2) {
    h = image.dim(0);
    w = image.dim(1);
  } else if (image.rank() == 3 && (image.dim(0) == 1 || image.dim(0) == 3)) {
    c = image.dim(0);
    h = image.dim(1);
    w = image.dim(2);
  } else {
    throw UsageError("write_pfm: expected [H,W], [1,H,W] or [3,H,W], got " + shape_string(image.shape()));
  }
  std::string out = (c == 3 ? "PF\n" : "Pf\n") + std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + sizeof(float) * c * h * w);
  char* dst = out.data() + header;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  auto v = image.values();
  for (int r = h - 1; r >= 0; --r) {
    for (int col = 0; col < w; ++col) {
      for (int ch = 0; ch < c; ++ch) {
        const float f = v[ch * plane + static_cast<std::size_t>(r) * w + col];
        std::memcpy(dst, &f, sizeof f);
        dst += sizeof f;
      }
    }
  }
  return out;
}

Tensor decode_pfm(std::string_view bytes) {
  std::size_t pos = 0;
  const std::string_view magic = next_token(bytes, pos, "magic");
  int c = 0;
  if (magic == "PF") {
    c = 3;
  } else if (magic == "Pf") {
    c = 1;
  } else {
    throw ParseError("PFM: bad magic '" + std::string(magic) + "'", 0);
  }
  const int w = parse_number<int>(bytes, next_token(bytes, pos, "width"), "width");
  const std::string_view h_token = next_token(bytes, pos, "height");
  const int h = parse_number<int>(bytes, h_token, "height");
  if (w <= 0 || h <= 0) throw ParseError("PFM: non-positive dimensions", h_token.data() - bytes.data());
  const std::string_view scale_token = next_token(bytes, pos, "scale");
  const double scale = parse_number<double>(bytes, scale_token, "scale");
  if (scale == 0) throw ParseError("PFM: zero scale", scale_token.data() - bytes.data());
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError("PFM: header not terminated", pos);
  }
  ++pos;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const std::size_t need = sizeof(float) * c * plane;
  if (bytes.size() - pos < need) {
    throw ParseError("PFM: truncated raster, expected " + std::to_string(need) + " bytes, found " +
                         std::to_string(bytes.size() - pos),
                     bytes.size());
  }
  if (bytes.size() - pos > need) throw ParseError("PFM: trailing bytes after raster", pos + need);
  const bool big_endian = scale > 0;
  Tensor out({c, h, w});
  auto v = out.values();
  const char* src = bytes.data() + pos;
  for (int r = h - 1; r >= 0; --r) {
    for (int col = 0; col < w; ++col) {
      for (int ch = 0; ch < c; ++ch) {
        std::uint32_t bits;
        std::memcpy(&bits, src, sizeof bits);
        if (big_endian) bits = __builtin_bswap32(bits);
        v[ch * plane + static_cast<std::size_t>(r) * w + col] = std::bit_cast<float>(bits);
        src += sizeof bits;
      }
    }
  }
  return out;
}

void write_pfm(const std::string& path, const Tensor& image) { write_file(path, encode_pfm(image)); }

Tensor read_pfm(const std::string& path) { return decode_pfm(read_file(path)); }

void write_normal_map(const std::string& normal_path, const std::string& mask_path, const NormalMap& map) {
  write_pfm(normal_path, map.to_tensor());
  if (!mask_path.empty()) write_pfm(mask_path, map.mask_tensor());
}

NormalMap read_normal_map(const std::string& normal_path, const std::string& mask_path) {
  const Tensor normals = read_pfm(normal_path);
  if (normals.dim(0) != 3) throw DataError(normal_path + ": normal map must have 3 channels");
  if (mask_path.empty()) return NormalMap::from_tensor(normals);
  const Tensor mask = read_pfm(mask_path);
  if (mask.dim(0) != 1 || mask.dim(1) != normals.dim(1) || mask.dim(2) != normals.dim(2)) {
    throw DataError(mask_path + ": mask must be one channel matching " + normal_path);
  }
  return NormalMap::from_tensor(normals, mask);
}

}  // namespace psnet
