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

#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "pcq/error.hpp"
#include "pcq/peaks.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace pcq {
namespace {

Heatmap grid(std::size_t h, std::size_t w, std::vector<float> v) { return Heatmap(1, h, w, std::move(v)); }

// Brute-force strict 8-neighbour maxima, no plateau handling.
PeakSet strict_maxima_oracle(const ChannelView& ch, double t) {
  PeakSet out;
  for (std::size_t y = 0; y < ch.height(); ++y) {
    for (std::size_t x = 0; x < ch.width(); ++x) {
      const float v = ch.at(x, y);
      if (v < t) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const long nx = static_cast<long>(x) + dx, ny = static_cast<long>(y) + dy;
          if (nx < 0 || ny < 0 || nx >= static_cast<long>(ch.width()) || ny >= static_cast<long>(ch.height())) continue;
          if (ch.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) >= v) peak = false;
        }
      }
      if (peak) out.push_back({x, y, v});
    }
  }
  return out;
}

TEST(LocalMaximaTest, ZeroGridHasNoPeaks) {
  EXPECT_TRUE(local_maxima_2d(grid(5, 5, std::vector<float>(25, 0.0f)).channel(0), 0.5).empty());
}

TEST(LocalMaximaTest, SinglePeak) {
  std::vector<float> v(25, 0.0f);
  v[2 * 5 + 2] = 0.9f;
  const auto peaks = local_maxima_2d(grid(5, 5, v).channel(0), 0.5);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0], (Peak{2, 2, 0.9f}));
}

TEST(LocalMaximaTest, ThresholdFiltersLowerPeak) {
  std::vector<float> v(25, 0.0f);
  v[1 * 5 + 1] = 0.8f;
  v[3 * 5 + 3] = 0.7f;
  const auto hm = grid(5, 5, v);
  const auto peaks = local_maxima_2d(hm.channel(0), 0.75);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0], (Peak{1, 1, 0.8f}));
  EXPECT_EQ(local_maxima_2d(hm.channel(0), 0.5).size(), 2u);
}

TEST(LocalMaximaTest, EdgeAndCornerCellsCanBePeaks) {
  std::vector<float> v(12, 0.1f);
  v[0] = 0.9f;
  v[11] = 0.8f;
  const auto peaks = local_maxima_2d(grid(3, 4, v).channel(0), 0.5);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_EQ(peaks[0], (Peak{0, 0, 0.9f}));
  EXPECT_EQ(peaks[1], (Peak{3, 2, 0.8f}));
}

TEST(LocalMaximaTest, PlateauYieldsOnePeakAtCentroid) {
  // 3x3 plateau centred on (3,2) in a 7x5 grid.
  std::vector<float> v(35, 0.2f);
  for (std::size_t y = 1; y <= 3; ++y) {
    for (std::size_t x = 2; x <= 4; ++x) v[y * 7 + x] = 0.7f;
  }
  const auto peaks = local_maxima_2d(grid(5, 7, v).channel(0), 0.5);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0], (Peak{3, 2, 0.7f}));
}

TEST(LocalMaximaTest, PlateauWithHigherNeighbourIsNotAPeak) {
  std::vector<float> v(25, 0.0f);
  v[2 * 5 + 1] = 0.6f;
  v[2 * 5 + 2] = 0.6f;
  v[2 * 5 + 3] = 0.8f;
  const auto peaks = local_maxima_2d(grid(5, 5, v).channel(0), 0.5);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0].x, 3u);
}

TEST(LocalMaximaTest, TwoCellPlateauIsOnePeak) {
  std::vector<float> v(20, 0.0f);
  v[1 * 5 + 1] = 0.9f;
  v[1 * 5 + 2] = 0.9f;
  const auto peaks = local_maxima_2d(grid(4, 5, v).channel(0), 0.5);
  EXPECT_EQ(peaks.size(), 1u);
}

TEST(LocalMaximaTest, EmptyGridThrows) {
  const std::vector<float> none;
  EXPECT_THROW(local_maxima_2d(ChannelView(none, 0, 0), 0.5), InvalidArgument);
}

TEST(LocalMaximaTest, MatchesBruteForceOnTieFreeGrids) {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hm = testing::random_heatmap(rng, 1, 1 + rng.below(20), 1 + rng.below(20));
    const double t = rng.uniform();
    EXPECT_EQ(local_maxima_2d(hm.channel(0), t), strict_maxima_oracle(hm.channel(0), t));
  }
}

TEST(LocalMaximaTest, PropertiesOnQuantizedGrids) {
  SplitMix64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const auto hm = testing::random_heatmap(rng, 1, 2 + rng.below(15), 2 + rng.below(15), 4);
    const auto ch = hm.channel(0);
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto peaks = local_maxima_2d(ch, t);
      EXPECT_LE(peaks.size(), previous);
      previous = peaks.size();
      for (std::size_t i = 0; i < peaks.size(); ++i) {
        EXPECT_GE(peaks[i].value, t);
        EXPECT_EQ(peaks[i].value, ch.at(peaks[i].x, peaks[i].y));
        for (std::size_t j = i + 1; j < peaks.size(); ++j) {
          const long dx = static_cast<long>(peaks[i].x) - static_cast<long>(peaks[j].x);
          const long dy = static_cast<long>(peaks[i].y) - static_cast<long>(peaks[j].y);
          EXPECT_FALSE(std::abs(dx) <= 1 && std::abs(dy) <= 1);
        }
      }
    }
  }
}

using testing::otsu_oracle;

TEST(OtsuTest, SeparatesTwoGroups) {
  std::vector<float> v(8, 0.1f);
  v.push_back(0.9f);
  v.push_back(0.9f);
  const auto hm = grid(2, 5, v);
  const auto k = otsu_threshold(hm.channel(0));
  ASSERT_TRUE(k);
  EXPECT_GT(*k, 0.1);
  EXPECT_LE(*k, 0.9);
  EXPECT_EQ(otsu_split(hm.channel(0)), otsu_oracle(hm.channel(0)));
}

TEST(OtsuTest, ConstantGridIsDegenerate) {
  const auto hm = grid(4, 4, std::vector<float>(16, 0.3f));
  EXPECT_FALSE(otsu_threshold(hm.channel(0)));
  EXPECT_EQ(resolve_threshold(hm.channel(0), {0.5, ThresholdMode::DynamicOtsu}), 0.5);
}

TEST(OtsuTest, BimodalSplitMatchesOracle) {
  std::vector<float> v(50, 0.2f);
  v.resize(100, 0.8f);
  const auto hm = grid(10, 10, v);
  const auto s = otsu_split(hm.channel(0));
  ASSERT_TRUE(s);
  EXPECT_EQ(s, otsu_oracle(hm.channel(0)));
  // Every split between the two bins scores the same; the smallest wins.
  EXPECT_EQ(*s, otsu_bin(0.2f) + 1);
  const double k = *otsu_threshold(hm.channel(0));
  EXPECT_GT(k, 0.2);
  EXPECT_LE(k, 0.8);
}

TEST(OtsuTest, BinEdges) {
  EXPECT_EQ(otsu_bin(0.0f), 0u);
  EXPECT_EQ(otsu_bin(1.0f), 255u);
  EXPECT_EQ(otsu_bin(0.5f), 128u);
  EXPECT_EQ(otsu_bin(std::nextafter(1.0f, 0.0f)), 255u);
  EXPECT_EQ(otsu_bin(1.0f / 256.0f), 1u);
}

TEST(OtsuTest, MatchesExhaustiveOracle) {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto hm = testing::random_heatmap(rng, 1, 1 + rng.below(24), 1 + rng.below(24),
                                            trial % 3 == 0 ? static_cast<int>(2 + rng.below(10)) : 0);
    EXPECT_EQ(otsu_split(hm.channel(0)), otsu_oracle(hm.channel(0))) << "trial " << trial;
  }
}

TEST(EffectiveThresholdTest, Rule) {
  EXPECT_EQ(effective_threshold(0.6, 0.5), 0.6);
  EXPECT_EQ(effective_threshold(0.3, 0.5), 0.5);
  EXPECT_EQ(effective_threshold(0.5, 0.5), 0.5);
}

TEST(ThresholdPolicyTest, Validation) {
  EXPECT_THROW((ThresholdPolicy{0.0, ThresholdMode::Fixed}.validate()), InvalidArgument);
  EXPECT_THROW((ThresholdPolicy{1.0, ThresholdMode::Fixed}.validate()), InvalidArgument);
  EXPECT_NO_THROW((ThresholdPolicy{0.5, ThresholdMode::DynamicOtsu}.validate()));
}

TEST(CountFromHeatmapTest, FourSeparatedCars) {
  const ClassCatalog cat({"car", "pedestrian"});
  const FrameAnnotation ann{"f", 40, 40, {{0, 5, 5, 3}, {0, 30, 6, 3}, {0, 8, 33, 3}, {0, 25, 25, 3}}};
  const auto hm = render_target_heatmap(ann, cat);
  for (auto mode : {ThresholdMode::Fixed, ThresholdMode::DynamicOtsu}) {
    const auto r = count_from_heatmap(hm, {0.5, mode});
    EXPECT_EQ(r.counts, (std::vector<std::size_t>{4, 0}));
    EXPECT_EQ(r.peaks[0].size(), 4u);
  }
}

TEST(CountFromHeatmapTest, AllZero) {
  EXPECT_EQ(count_from_heatmap(Heatmap(3, 8, 8), {}).counts, std::vector<std::size_t>(3, 0));
}

TEST(CountFromHeatmapTest, DensePedestrianFrame) {
  const ClassCatalog cat({"pedestrian"});
  SplitMix64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ann = testing::separated_annotation(rng, 1, 30, 32, 32, 1.0, 2.999);
    ASSERT_EQ(ann.centers.size(), 30u);
    const auto hm = render_target_heatmap(ann, cat);
    EXPECT_EQ(count_from_heatmap(hm, {0.5, ThresholdMode::Fixed}).counts[0], 30u);
    EXPECT_EQ(count_from_heatmap(hm, {0.5, ThresholdMode::DynamicOtsu}).counts[0], 30u);
  }
}

TEST(CountFromHeatmapTest, PeaksRespectEffectiveThreshold) {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto hm = testing::random_heatmap(rng, 2, 12, 12, trial % 2 ? 6 : 0);
    const ThresholdPolicy policy{rng.uniform(0.05, 0.95), ThresholdMode::DynamicOtsu};
    const auto r = count_from_heatmap(hm, policy);
    for (std::size_t c = 0; c < 2; ++c) {
      const double t = resolve_threshold(hm.channel(c), policy);
      EXPECT_GE(t, policy.fixed_t);
      for (const auto& p : r.peaks[c]) EXPECT_GE(p.value, t);
      EXPECT_EQ(r.peaks[c], local_maxima_2d(hm.channel(c), t));
    }
  }
}

}  // namespace
}  // namespace pcq
