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

#include <charconv>
#include <cstdio>
#include <string>

#include "psnet/errors.h"
#include "psnet/io.h"

namespace psnet {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || end != field.data() + field.size()) {
    throw ParseError("lights: non-numeric field '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace

std::string format_lights(const std::vector<DirectionalLight>& lights) {
  std::string out;
  char buf[128];
  for (const auto& l : lights) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", l.direction.x(), l.direction.y(), l.direction.z(),
                  l.intensity);
    out += buf;
  }
  return out;
}

std::vector<DirectionalLight> parse_lights(std::string_view text) {
  std::vector<DirectionalLight> lights;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> fields;
    while (true) {
      const std::size_t comma = line.find(',');
      fields.push_back(parse_field(line.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (fields.size() != 4) {
      throw ParseError("lights: expected 4 fields lx,ly,lz,e, got " + std::to_string(fields.size()), line_no);
    }
    Eigen::Vector3d d(fields[0], fields[1], fields[2]);
    const double len = d.norm();
    if (!(len > 0) || !std::isfinite(len)) throw ParseError("lights: zero or non-finite direction", line_no);
    d /= len;
    if (d.z() < -1e-6) throw ParseError("lights: direction points into the lower hemisphere", line_no);
    if (!(fields[3] > 0) || !std::isfinite(fields[3])) throw ParseError("lights: intensity must be positive", line_no);
    lights.push_back({d, fields[3]});
  }
  return lights;
}

void write_lights(const std::string& path, const std::vector<DirectionalLight>& lights) {
  write_file(path, format_lights(lights));
}

std::vector<DirectionalLight> read_lights(const std::string& path) { return parse_lights(read_file(path)); }

}  // namespace psnet
