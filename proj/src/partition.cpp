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

#include "pcq/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "pcq/error.hpp"

namespace pcq {

void CounterConfig::validate() const {
  if (partitions == 0) throw InvalidArgument("partition count must be >= 1");
  if (!(overlap_ratio >= 0.0)) throw InvalidArgument("overlap ratio must be >= 0");
  if (!(merge_radius > 0.0)) throw InvalidArgument("merge radius must be > 0");
  threshold.validate();
}

std::pair<std::size_t, std::size_t> partition_shape(std::size_t partitions) {
  if (partitions == 0) throw InvalidArgument("partition count must be >= 1");
  auto rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(partitions)));
  while (rows * rows > partitions) --rows;
  while ((rows + 1) * (rows + 1) <= partitions) ++rows;
  while (partitions % rows != 0) --rows;
  return {rows, partitions / rows};
}

std::vector<Region> partition_regions(std::size_t width, std::size_t height, std::size_t partitions) {
  const auto [rows, cols] = partition_shape(partitions);
  if (cols > width || rows > height) {
    throw InvalidArgument(fmt::format("{} partitions ({}x{}) do not fit a {}x{} grid", partitions,
                                      rows, cols, width, height));
  }
  const std::size_t tile_w = width / cols;
  const std::size_t tile_h = height / rows;
  std::vector<Region> regions;
  regions.reserve(partitions);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Region reg;
      reg.x_start = c * tile_w;
      reg.y_start = r * tile_h;
      reg.x_end = c + 1 == cols ? width : (c + 1) * tile_w;
      reg.y_end = r + 1 == rows ? height : (r + 1) * tile_h;
      regions.push_back(reg);
    }
  }
  return regions;
}

Region expand_region(const Region& r, double ratio, std::size_t width, std::size_t height) {
  if (!(ratio >= 0.0)) throw InvalidArgument("overlap ratio must be >= 0");
  const auto expand_w = static_cast<std::size_t>(std::floor(static_cast<double>(r.width()) * ratio));
  const auto expand_h = static_cast<std::size_t>(std::floor(static_cast<double>(r.height()) * ratio));
  Region out;
  out.x_start = r.x_start > expand_w ? r.x_start - expand_w : 0;
  out.y_start = r.y_start > expand_h ? r.y_start - expand_h : 0;
  out.x_end = std::min(width, r.x_end + expand_w);
  out.y_end = std::min(height, r.y_end + expand_h);
  return out;
}

PeakSet merge_duplicate_centers(PeakSet centers, double radius) {
  const double r2 = radius * radius;
  PeakSet kept;
  std::vector<bool> removed(centers.size(), false);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (removed[i]) continue;
    const Peak& current = centers[i];
    kept.push_back(current);
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if (removed[j]) continue;
      const double dx = static_cast<double>(centers[j].x) - static_cast<double>(current.x);
      const double dy = static_cast<double>(centers[j].y) - static_cast<double>(current.y);
      if (dx * dx + dy * dy <= r2) removed[j] = true;
    }
  }
  return kept;
}

namespace {

PeakSet region_peaks(const ChannelView& channel, const Region& region, const ThresholdPolicy& policy) {
  const auto view = channel.slice(region);
  PeakSet peaks = local_maxima_2d(view, resolve_threshold(view, policy));
  for (auto& p : peaks) {
    p.x += region.x_start;
    p.y += region.y_start;
  }
  return peaks;
}

}  // namespace

CountResult infer_with_overlap(const Heatmap& hm, const CounterConfig& cfg) {
  cfg.validate();
  auto regions = partition_regions(hm.width(), hm.height(), cfg.partitions);
  for (auto& r : regions) r = expand_region(r, cfg.overlap_ratio, hm.width(), hm.height());

  CountResult result;
  result.counts.resize(hm.channels());
  result.peaks.resize(hm.channels());
  std::vector<std::uint8_t> marked(hm.cells());
  for (std::size_t c = 0; c < hm.channels(); ++c) {
    const auto channel = hm.channel(c);
    std::fill(marked.begin(), marked.end(), 0);
    PeakSet centers;
    for (const auto& region : regions) {
      for (const auto& p : region_peaks(channel, region, cfg.threshold)) {
        auto& m = marked[p.y * hm.width() + p.x];
        if (m) continue;
        m = 1;
        centers.push_back(p);
      }
    }
    result.peaks[c] = regions.size() > 1 ? merge_duplicate_centers(std::move(centers), cfg.merge_radius)
                                         : std::move(centers);
    result.counts[c] = result.peaks[c].size();
  }
  return result;
}

CountResult infer_partitioned(const Heatmap& hm, const CounterConfig& cfg) {
  cfg.validate();
  const auto regions = partition_regions(hm.width(), hm.height(), cfg.partitions);
  CountResult result;
  result.counts.resize(hm.channels());
  result.peaks.resize(hm.channels());
  for (std::size_t c = 0; c < hm.channels(); ++c) {
    const auto channel = hm.channel(c);
    for (const auto& region : regions) {
      auto peaks = region_peaks(channel, region, cfg.threshold);
      result.peaks[c].insert(result.peaks[c].end(), peaks.begin(), peaks.end());
    }
    result.counts[c] = result.peaks[c].size();
  }
  return result;
}

std::vector<double> partition_weights(std::span<const std::size_t> region_counts) {
  if (region_counts.empty()) throw InvalidArgument("partition weights need at least one region");
  const double base = 1.0 / static_cast<double>(region_counts.size());
  const std::size_t total = std::accumulate(region_counts.begin(), region_counts.end(), std::size_t{0});
  std::vector<double> weights(region_counts.size(), base);
  if (total == 0) return weights;
  for (std::size_t i = 0; i < region_counts.size(); ++i) {
    weights[i] += static_cast<double>(region_counts[i]) / static_cast<double>(total);
  }
  return weights;
}

std::vector<std::size_t> region_object_counts(std::span<const Region> regions,
                                              std::span<const ObjectCenter> centers) {
  std::vector<std::size_t> counts(regions.size(), 0);
  std::size_t max_x = 0, max_y = 0;
  for (const auto& r : regions) {
    max_x = std::max(max_x, r.x_end);
    max_y = std::max(max_y, r.y_end);
  }
  for (const auto& c : centers) {
    const auto x = std::min(static_cast<std::size_t>(std::floor(c.x + 0.5)), max_x - 1);
    const auto y = std::min(static_cast<std::size_t>(std::floor(c.y + 0.5)), max_y - 1);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      if (regions[i].contains(x, y)) {
        ++counts[i];
        break;
      }
    }
  }
  return counts;
}

}  // namespace pcq
