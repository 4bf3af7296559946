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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcq {

/// Ordered list of object categories. The index of a class is its heatmap
/// channel and is stable for the lifetime of a corpus.
class ClassCatalog {
 public:
  ClassCatalog() = default;
  explicit ClassCatalog(std::vector<std::string> names);

  /// car, truck, construction_vehicle, bus, trailer, barrier, motorcycle,
  /// bicycle, pedestrian, traffic_cone.
  static ClassCatalog nuscenes();

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }

  /// Throws InvalidArgument for unknown names.
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;

  bool operator==(const ClassCatalog&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Half-open cell rectangle [x_start, x_end) x [y_start, y_end).
struct Region {
  std::size_t x_start = 0;
  std::size_t y_start = 0;
  std::size_t x_end = 0;
  std::size_t y_end = 0;

  std::size_t width() const { return x_end - x_start; }
  std::size_t height() const { return y_end - y_start; }
  std::size_t area() const { return width() * height(); }
  bool contains(std::size_t x, std::size_t y) const {
    return x >= x_start && x < x_end && y >= y_start && y < y_end;
  }
  bool contains(const Region& other) const {
    return other.x_start >= x_start && other.x_end <= x_end && other.y_start >= y_start &&
           other.y_end <= y_end;
  }
  bool operator==(const Region&) const = default;
};

/// Read-only strided view of one heatmap channel, or of a rectangle within
/// one. Coordinates are local to the view.
class ChannelView {
 public:
  ChannelView(const float* data, std::size_t width, std::size_t height, std::size_t stride)
      : data_(data), width_(width), height_(height), stride_(stride) {}
  ChannelView(std::span<const float> values, std::size_t width, std::size_t height);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return width_ * height_; }
  bool empty() const { return size() == 0; }

  float at(std::size_t x, std::size_t y) const { return data_[y * stride_ + x]; }

  /// Sub-view over `r`, which must lie inside this view.
  ChannelView slice(const Region& r) const;

 private:
  const float* data_;
  std::size_t width_;
  std::size_t height_;
  std::size_t stride_;
};

/// K-channel grid of activations in [0, 1], channel-major then row-major.
class Heatmap {
 public:
  Heatmap() = default;
  /// All-zero heatmap.
  Heatmap(std::size_t channels, std::size_t height, std::size_t width);
  /// Takes ownership of `values`; throws DataError on size mismatch or any
  /// value outside [0, 1].
  Heatmap(std::size_t channels, std::size_t height, std::size_t width, std::vector<float> values);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t cells() const { return height_ * width_; }

  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return values_[(c * height_ + y) * width_ + x];
  }
  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return values_[(c * height_ + y) * width_ + x];
  }

  ChannelView channel(std::size_t c) const;
  std::span<float> channel_values(std::size_t c);
  std::span<const float> channel_values(std::size_t c) const;
  const std::vector<float>& values() const { return values_; }

  bool operator==(const Heatmap&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> values_;
};

struct ObjectCenter {
  std::size_t class_index = 0;
  double x = 0.0;
  double y = 0.0;
  /// Characteristic radius in cells; the rendered Gaussian uses sigma = extent / 3.
  double extent = 1.0;

  bool operator==(const ObjectCenter&) const = default;
};

struct FrameAnnotation {
  std::string frame_id;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<ObjectCenter> centers;

  bool operator==(const FrameAnnotation&) const = default;
};

/// Throws DataError naming the first center that is out of bounds, has a
/// non-positive extent or an unknown class.
void validate_annotation(const FrameAnnotation& ann, const ClassCatalog& catalog);

/// Max-combines one unnormalized Gaussian per center into `channel`
/// (row-major, width x height). The nearest cell to each center is set to 1.
void splat_centers(std::span<float> channel, std::size_t width, std::size_t height,
                   std::span<const ObjectCenter> centers);

/// Ground-truth target heatmap for an annotation.
Heatmap render_target_heatmap(const FrameAnnotation& ann, const ClassCatalog& catalog);

/// counts[c] = number of centers of class c.
std::vector<std::size_t> annotation_counts(const FrameAnnotation& ann, const ClassCatalog& catalog);

// PCQH binary format: "PCQH", u32 channels, u32 height, u32 width (little
// endian), then channel-major row-major little-endian f32 values. A heatmap
// stream file is a plain concatenation of records.

void write_heatmap(std::ostream& out, const Heatmap& hm);
/// Throws DataError on truncation, bad magic or out-of-range values.
Heatmap read_heatmap(std::istream& in);

void save_heatmaps(const std::string& path, std::span<const Heatmap> heatmaps);
std::vector<Heatmap> load_heatmaps(const std::string& path);

}  // namespace pcq
