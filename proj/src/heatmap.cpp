// Copyright 2026 The pcq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pcq/heatmap.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>

#include "pcq/error.hpp"

namespace pcq {

ClassCatalog::ClassCatalog(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw InvalidArgument("class catalog must contain at least one class");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw InvalidArgument("class names must be non-empty");
    if (!seen.insert(n).second) throw InvalidArgument(fmt::format("duplicate class name '{}'", n));
  }
}

ClassCatalog ClassCatalog::nuscenes() {
  return ClassCatalog({"car", "truck", "construction_vehicle", "bus", "trailer", "barrier",
                       "motorcycle", "bicycle", "pedestrian", "traffic_cone"});
}

std::size_t ClassCatalog::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw InvalidArgument(fmt::format("unknown class '{}'", name));
  return static_cast<std::size_t>(it - names_.begin());
}

bool ClassCatalog::contains(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

ChannelView::ChannelView(std::span<const float> values, std::size_t width, std::size_t height)
    : ChannelView(values.data(), width, height, width) {
  if (values.size() != width * height) throw InvalidArgument("channel view size mismatch");
}

ChannelView ChannelView::slice(const Region& r) const {
  if (r.x_end > width_ || r.y_end > height_ || r.x_start > r.x_end || r.y_start > r.y_end) {
    throw InvalidArgument(fmt::format("region [{},{})x[{},{}) outside {}x{} view", r.x_start,
                                      r.x_end, r.y_start, r.y_end, width_, height_));
  }
  return ChannelView(data_ + r.y_start * stride_ + r.x_start, r.width(), r.height(), stride_);
}

Heatmap::Heatmap(std::size_t channels, std::size_t height, std::size_t width)
    : channels_(channels), height_(height), width_(width), values_(channels * height * width, 0.0f) {}

Heatmap::Heatmap(std::size_t channels, std::size_t height, std::size_t width,
                 std::vector<float> values)
    : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != channels * height * width) {
    throw DataError(fmt::format("heatmap expects {} values, got {}", channels * height * width,
                                values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const float v = values_[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw DataError(fmt::format("heatmap value {} at flat index {} outside [0,1]", v, i));
    }
  }
}

ChannelView Heatmap::channel(std::size_t c) const {
  return ChannelView(channel_values(c), width_, height_);
}

std::span<float> Heatmap::channel_values(std::size_t c) {
  if (c >= channels_) throw InvalidArgument(fmt::format("channel {} out of range", c));
  return std::span<float>(values_).subspan(c * cells(), cells());
}

std::span<const float> Heatmap::channel_values(std::size_t c) const {
  if (c >= channels_) throw InvalidArgument(fmt::format("channel {} out of range", c));
  return std::span<const float>(values_).subspan(c * cells(), cells());
}

void validate_annotation(const FrameAnnotation& ann, const ClassCatalog& catalog) {
  if (ann.width == 0 || ann.height == 0) {
    throw DataError(fmt::format("frame '{}' has an empty grid", ann.frame_id));
  }
  for (std::size_t i = 0; i < ann.centers.size(); ++i) {
    const auto& c = ann.centers[i];
    const bool in_x = c.x >= 0.0 && c.x < static_cast<double>(ann.width);
    const bool in_y = c.y >= 0.0 && c.y < static_cast<double>(ann.height);
    if (!in_x || !in_y) {
      throw DataError(fmt::format("frame '{}': center #{} at ({}, {}) outside {}x{} grid",
                                  ann.frame_id, i, c.x, c.y, ann.width, ann.height));
    }
    if (!(c.extent > 0.0)) {
      throw DataError(
          fmt::format("frame '{}': center #{} has non-positive extent {}", ann.frame_id, i, c.extent));
    }
    if (c.class_index >= catalog.size()) {
      throw DataError(fmt::format("frame '{}': center #{} has class index {} but catalog has {}",
                                  ann.frame_id, i, c.class_index, catalog.size()));
    }
  }
}

namespace {

// exp(-40) ~ 4e-18; cells beyond this are left untouched.
constexpr double kMaxExponent = 40.0;

std::size_t nearest_cell(double v, std::size_t limit) {
  const double r = std::round(v);
  if (r <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(r), limit - 1);
}

}  // namespace

void splat_centers(std::span<float> channel, std::size_t width, std::size_t height,
                   std::span<const ObjectCenter> centers) {
  for (const auto& c : centers) {
    const double sigma = c.extent / 3.0;
    const double two_var = 2.0 * sigma * sigma;
    const double radius = std::sqrt(kMaxExponent * two_var);
    const auto lo_x = static_cast<std::size_t>(std::max(0.0, std::floor(c.x - radius)));
    const auto lo_y = static_cast<std::size_t>(std::max(0.0, std::floor(c.y - radius)));
    const auto hi_x = std::min(width - 1, static_cast<std::size_t>(std::ceil(c.x + radius)));
    const auto hi_y = std::min(height - 1, static_cast<std::size_t>(std::ceil(c.y + radius)));
    for (std::size_t y = lo_y; y <= hi_y; ++y) {
      const double dy = static_cast<double>(y) - c.y;
      for (std::size_t x = lo_x; x <= hi_x; ++x) {
        const double dx = static_cast<double>(x) - c.x;
        const double e = (dx * dx + dy * dy) / two_var;
        if (e > kMaxExponent) continue;
        const auto g = static_cast<float>(std::exp(-e));
        float& cell = channel[y * width + x];
        cell = std::max(cell, g);
      }
    }
    channel[nearest_cell(c.y, height) * width + nearest_cell(c.x, width)] = 1.0f;
  }
}

Heatmap render_target_heatmap(const FrameAnnotation& ann, const ClassCatalog& catalog) {
  validate_annotation(ann, catalog);
  Heatmap hm(catalog.size(), ann.height, ann.width);
  std::vector<std::vector<ObjectCenter>> by_class(catalog.size());
  for (const auto& c : ann.centers) by_class[c.class_index].push_back(c);
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    splat_centers(hm.channel_values(k), ann.width, ann.height, by_class[k]);
  }
  return hm;
}

std::vector<std::size_t> annotation_counts(const FrameAnnotation& ann, const ClassCatalog& catalog) {
  std::vector<std::size_t> counts(catalog.size(), 0);
  for (const auto& c : ann.centers) {
    if (c.class_index >= counts.size()) {
      throw DataError(fmt::format("frame '{}': class index {} outside catalog", ann.frame_id,
                                  c.class_index));
    }
    ++counts[c.class_index];
  }
  return counts;
}

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'C', 'Q', 'H'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                 static_cast<char>((v >> 16) & 0xFF),
                                 static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace

void write_heatmap(std::ostream& out, const Heatmap& hm) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(hm.channels()));
  put_u32(out, static_cast<std::uint32_t>(hm.height()));
  put_u32(out, static_cast<std::uint32_t>(hm.width()));
  for (float v : hm.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

Heatmap read_heatmap(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw DataError("bad PCQH magic");
  std::uint32_t channels = 0, height = 0, width = 0;
  if (!get_u32(in, channels) || !get_u32(in, height) || !get_u32(in, width)) {
    throw DataError("truncated PCQH header");
  }
  const std::size_t n = std::size_t{channels} * height * width;
  std::vector<float> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    if (!get_u32(in, bits)) throw DataError(fmt::format("truncated PCQH payload at value {}", i));
    values[i] = std::bit_cast<float>(bits);
  }
  return Heatmap(channels, height, width, std::move(values));
}

void save_heatmaps(const std::string& path, std::span<const Heatmap> heatmaps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path));
  for (const auto& hm : heatmaps) write_heatmap(out, hm);
  if (!out) throw DataError(fmt::format("write to '{}' failed", path));
}

std::vector<Heatmap> load_heatmaps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  std::vector<Heatmap> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    try {
      out.push_back(read_heatmap(in));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: record {}: {}", path, out.size(), e.what()));
    }
  }
  return out;
}

}  // namespace pcq
