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
#include <span>
#include <utility>
#include <vector>

#include "pcq/heatmap.hpp"
#include "pcq/peaks.hpp"

namespace pcq {

/// One counting-model configuration.
struct CounterConfig {
  /// Number of partitions, factored into the most-square rows x cols grid
  /// with rows <= cols.
  std::size_t partitions = 4;
  double overlap_ratio = 0.2;
  /// Duplicate-merge radius gamma, in cells.
  double merge_radius = 12.0;
  ThresholdPolicy threshold{0.5, ThresholdMode::DynamicOtsu};

  void validate() const;
  bool operator==(const CounterConfig&) const = default;
};

/// Default gamma for a scene whose largest object extent is `max_extent`.
inline double default_merge_radius(double max_extent) { return 2.0 * max_extent; }

/// (rows, cols) for `partitions`: 1 -> 1x1, 2 -> 1x2, 4 -> 2x2, 9 -> 3x3,
/// otherwise the factor pair a x b, a <= b, with a closest to sqrt(pt).
std::pair<std::size_t, std::size_t> partition_shape(std::size_t partitions);

/// Row-major equal tiling; the last row and column absorb remainders.
/// Throws InvalidArgument when a tile would be empty.
std::vector<Region> partition_regions(std::size_t width, std::size_t height, std::size_t partitions);

/// Grows every side by floor(size * ratio) cells, clamped to the grid.
Region expand_region(const Region& r, double ratio, std::size_t width, std::size_t height);

/// Greedy duplicate removal in input order: keep the first center, drop
/// every remaining center within Euclidean distance <= radius of it, repeat.
PeakSet merge_duplicate_centers(PeakSet centers, double radius);

/// Partitioned inference with overlapping regions. Each expanded region is
/// thresholded on its own (dynamic per-partition threshold) and searched for
/// local maxima; region peaks are mapped to global coordinates in region
/// scan order, exact repeats collapse, and duplicates are merged within
/// merge_radius. A single partition cannot produce duplicates and skips the
/// merge, so pt = 1 is plain count_from_heatmap.
CountResult infer_with_overlap(const Heatmap& hm, const CounterConfig& cfg);

/// Partitioned inference without expansion or merging: the sum of
/// independent per-region counts.
CountResult infer_partitioned(const Heatmap& hm, const CounterConfig& cfg);

/// w_i = 1/|R| + n_i / sum(n); the count term is 0 when the total is 0.
std::vector<double> partition_weights(std::span<const std::size_t> region_counts);

/// Object count per region for a list of centers.
std::vector<std::size_t> region_object_counts(std::span<const Region> regions,
                                              std::span<const ObjectCenter> centers);

}  // namespace pcq
