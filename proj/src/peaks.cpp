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

#include "pcq/peaks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pcq/error.hpp"

namespace pcq {

void ThresholdPolicy::validate() const {
  if (!(fixed_t > 0.0 && fixed_t < 1.0)) {
    throw InvalidArgument(fmt::format("fixed threshold {} outside (0,1)", fixed_t));
  }
}

PeakSet local_maxima_2d(const ChannelView& channel, double threshold) {
  if (channel.empty()) throw InvalidArgument("local maxima on an empty grid");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidArgument(fmt::format("threshold {} outside [0,1]", threshold));
  }
  const auto w = static_cast<std::ptrdiff_t>(channel.width());
  const auto h = static_cast<std::ptrdiff_t>(channel.height());
  auto flat = [w](std::ptrdiff_t x, std::ptrdiff_t y) { return static_cast<std::size_t>(y * w + x); };

  std::vector<std::uint8_t> visited(channel.size(), 0);
  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> component;
  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> stack;
  PeakSet peaks;

  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      if (visited[flat(x, y)]) continue;
      const float v = channel.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      if (static_cast<double>(v) < threshold) continue;

      // Flood the equal-valued 8-connected component and check its border.
      component.clear();
      stack.assign(1, {x, y});
      visited[flat(x, y)] = 1;
      bool dominant = true;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        component.emplace_back(cx, cy);
        for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
          for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const auto nx = cx + dx;
            const auto ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const float nv = channel.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));
            if (nv > v) {
              dominant = false;
            } else if (nv == v && !visited[flat(nx, ny)]) {
              visited[flat(nx, ny)] = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
      if (!dominant) continue;

      std::sort(component.begin(), component.end(),
                [](const auto& a, const auto& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
      double mx = 0.0, my = 0.0;
      for (const auto& [px, py] : component) {
        mx += static_cast<double>(px);
        my += static_cast<double>(py);
      }
      mx /= static_cast<double>(component.size());
      my /= static_cast<double>(component.size());
      auto best = component.front();
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& p : component) {
        const double ddx = static_cast<double>(p.first) - mx;
        const double ddy = static_cast<double>(p.second) - my;
        const double d = ddx * ddx + ddy * ddy;
        if (d < best_d) {
          best_d = d;
          best = p;
        }
      }
      peaks.push_back({static_cast<std::size_t>(best.first), static_cast<std::size_t>(best.second), v});
    }
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
  return peaks;
}

std::size_t otsu_bin(float v) {
  const double scaled = std::floor(static_cast<double>(v) * static_cast<double>(kOtsuBins));
  if (!(scaled > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(scaled), kOtsuBins - 1);
}

namespace {

__extension__ using i128 = __int128;
__extension__ using u128 = unsigned __int128;

// Between-class variance of split s, up to the constant factor 1/(N^2 256^2),
// is (n1*S0 - n0*S1)^2 / (n0*n1) with S the sum of bin indices per class.
// Scores are compared exactly by cross multiplication while that fits in
// 128 bits, which covers grids up to 600k cells.
struct SplitScore {
  i128 diff = 0;
  std::uint64_t n0 = 0;
  std::uint64_t n1 = 0;
};

constexpr std::uint64_t kExactCellLimit = 600'000;

bool exact_greater(const SplitScore& a, const SplitScore& b) {
  const auto a2 = static_cast<u128>(a.diff < 0 ? -a.diff : a.diff);
  const auto b2 = static_cast<u128>(b.diff < 0 ? -b.diff : b.diff);
  return (a2 * a2) * (b.n0 * b.n1) > (b2 * b2) * (a.n0 * a.n1);
}

bool approx_greater(const SplitScore& a, const SplitScore& b) {
  auto value = [](const SplitScore& s) {
    const auto d = static_cast<long double>(s.diff);
    return d * d / (static_cast<long double>(s.n0) * static_cast<long double>(s.n1));
  };
  return value(a) > value(b);
}

}  // namespace

std::optional<std::size_t> otsu_split(const ChannelView& channel) {
  if (channel.empty()) throw InvalidArgument("otsu threshold on an empty grid");
  std::array<std::uint64_t, kOtsuBins> hist{};
  for (std::size_t y = 0; y < channel.height(); ++y) {
    for (std::size_t x = 0; x < channel.width(); ++x) ++hist[otsu_bin(channel.at(x, y))];
  }
  const std::uint64_t total = channel.size();
  i128 sum_all = 0;
  for (std::size_t i = 0; i < kOtsuBins; ++i) sum_all += static_cast<i128>(i) * hist[i];

  const bool exact = total <= kExactCellLimit;
  std::optional<std::size_t> best;
  SplitScore best_score;
  std::uint64_t n0 = 0;
  i128 s0 = 0;
  for (std::size_t s = 1; s < kOtsuBins; ++s) {
    n0 += hist[s - 1];
    s0 += static_cast<i128>(s - 1) * hist[s - 1];
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const i128 s1 = sum_all - s0;
    SplitScore score{static_cast<i128>(n1) * s0 - static_cast<i128>(n0) * s1, n0, n1};
    if (score.diff == 0) continue;
    if (!best || (exact ? exact_greater(score, best_score) : approx_greater(score, best_score))) {
      best = s;
      best_score = score;
    }
  }
  return best;
}

std::optional<double> otsu_threshold(const ChannelView& channel) {
  const auto s = otsu_split(channel);
  if (!s) return std::nullopt;
  return static_cast<double>(*s) / static_cast<double>(kOtsuBins);
}

double effective_threshold(double k, double t) { return k >= t ? k : t; }

double resolve_threshold(const ChannelView& channel, const ThresholdPolicy& policy) {
  if (policy.mode == ThresholdMode::Fixed) return policy.fixed_t;
  const auto k = otsu_threshold(channel);
  return k ? effective_threshold(*k, policy.fixed_t) : policy.fixed_t;
}

CountResult count_from_heatmap(const Heatmap& hm, const ThresholdPolicy& policy) {
  policy.validate();
  CountResult result;
  result.counts.resize(hm.channels());
  result.peaks.resize(hm.channels());
  for (std::size_t c = 0; c < hm.channels(); ++c) {
    const auto view = hm.channel(c);
    result.peaks[c] = local_maxima_2d(view, resolve_threshold(view, policy));
    result.counts[c] = result.peaks[c].size();
  }
  return result;
}

}  // namespace pcq
