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
#include <optional>
#include <vector>

#include "pcq/heatmap.hpp"

namespace pcq {

enum class ThresholdMode { Fixed, DynamicOtsu };

struct ThresholdPolicy {
  double fixed_t = 0.5;
  ThresholdMode mode = ThresholdMode::Fixed;

  void validate() const;
  bool operator==(const ThresholdPolicy&) const = default;
};

struct Peak {
  std::size_t x = 0;
  std::size_t y = 0;
  float value = 0.0f;

  bool operator==(const Peak&) const = default;
};

using PeakSet = std::vector<Peak>;

/// Per-class counts and the peaks behind them.
struct CountResult {
  std::vector<std::size_t> counts;
  std::vector<PeakSet> peaks;
};

/// Cells >= threshold that are strictly greater than all 8 neighbours
/// (neighbours outside the view count as -inf). An 8-connected plateau of
/// equal values whose whole border is strictly lower yields one peak, at the
/// plateau cell nearest its centroid. Result is sorted row-major.
PeakSet local_maxima_2d(const ChannelView& channel, double threshold);

constexpr std::size_t kOtsuBins = 256;

/// Histogram bin of a value in [0, 1]: floor(v * 256), with 1.0 in the last bin.
std::size_t otsu_bin(float v);

/// Index s in [1, 255] of the split maximizing w0 * w1 * (m0 - m1)^2, where
/// class 0 holds bins [0, s). Ties go to the smaller s. nullopt when the
/// variance is zero for every split (fewer than two occupied bins).
std::optional<std::size_t> otsu_split(const ChannelView& channel);

/// Otsu threshold k = split / 256, or nullopt when degenerate.
std::optional<double> otsu_threshold(const ChannelView& channel);

/// k when k >= t, otherwise t.
double effective_threshold(double k, double t);

/// Threshold the policy applies to this channel. A degenerate Otsu result
/// falls back to fixed_t.
double resolve_threshold(const ChannelView& channel, const ThresholdPolicy& policy);

/// Counts every channel on the whole grid.
CountResult count_from_heatmap(const Heatmap& hm, const ThresholdPolicy& policy);

}  // namespace pcq
