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
#include <numeric>

#include "pcq/error.hpp"
#include "pcq/partition.hpp"
#include "test_util.hpp"

namespace pcq {
namespace {

using Shape = std::pair<std::size_t, std::size_t>;

double dist(const Peak& a, const Peak& b) {
  const double dx = static_cast<double>(a.x) - static_cast<double>(b.x);
  const double dy = static_cast<double>(a.y) - static_cast<double>(b.y);
  return std::sqrt(dx * dx + dy * dy);
}

TEST(PartitionShapeTest, SupportedCounts) {
  EXPECT_EQ(partition_shape(1), Shape(1, 1));
  EXPECT_EQ(partition_shape(2), Shape(1, 2));
  EXPECT_EQ(partition_shape(4), Shape(2, 2));
  EXPECT_EQ(partition_shape(9), Shape(3, 3));
  EXPECT_EQ(partition_shape(6), Shape(2, 3));
  EXPECT_EQ(partition_shape(7), Shape(1, 7));
  EXPECT_EQ(partition_shape(12), Shape(3, 4));
}

TEST(PartitionRegionsTest, Examples) {
  const auto four = partition_regions(128, 128, 4);
  ASSERT_EQ(four.size(), 4u);
  EXPECT_EQ(four[0], (Region{0, 0, 64, 64}));
  EXPECT_EQ(four[1], (Region{64, 0, 128, 64}));
  EXPECT_EQ(four[3], (Region{64, 64, 128, 128}));
  const auto two = partition_regions(128, 128, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], (Region{0, 0, 64, 128}));
  EXPECT_EQ(two[1], (Region{64, 0, 128, 128}));
  for (const auto& r : partition_regions(120, 120, 9)) {
    EXPECT_EQ(r.width(), 40u);
    EXPECT_EQ(r.height(), 40u);
  }
  EXPECT_EQ(partition_regions(10, 7, 1), (std::vector<Region>{{0, 0, 10, 7}}));
}

TEST(PartitionRegionsTest, RemaindersGoToLastRowAndColumn) {
  const auto r = partition_regions(10, 11, 9);
  EXPECT_EQ(r[0], (Region{0, 0, 3, 3}));
  EXPECT_EQ(r[2], (Region{6, 0, 10, 3}));
  EXPECT_EQ(r[8], (Region{6, 6, 10, 11}));
}

TEST(PartitionRegionsTest, TilesGridExactly) {
  for (std::size_t w : {1u, 3u, 17u, 64u, 101u}) {
    for (std::size_t h : {1u, 4u, 33u, 90u}) {
      for (std::size_t pt : {1u, 2u, 3u, 4u, 6u, 9u, 12u}) {
        const auto [rows, cols] = partition_shape(pt);
        if (rows > h || cols > w) {
          EXPECT_THROW(partition_regions(w, h, pt), InvalidArgument);
          continue;
        }
        const auto regions = partition_regions(w, h, pt);
        ASSERT_EQ(regions.size(), pt);
        std::vector<int> hits(w * h, 0);
        for (const auto& r : regions) {
          ASSERT_GT(r.area(), 0u);
          for (std::size_t y = r.y_start; y < r.y_end; ++y) {
            for (std::size_t x = r.x_start; x < r.x_end; ++x) ++hits[y * w + x];
          }
        }
        for (int n : hits) ASSERT_EQ(n, 1);
      }
    }
  }
  EXPECT_THROW(partition_regions(10, 10, 0), InvalidArgument);
}

TEST(ExpandRegionTest, Examples) {
  const Region interior{64, 64, 128, 128};
  EXPECT_EQ(expand_region(interior, 0.0, 256, 256), interior);
  EXPECT_EQ(expand_region(interior, 0.2, 256, 256), (Region{52, 52, 140, 140}));
  EXPECT_EQ(expand_region(Region{0, 0, 64, 64}, 0.2, 128, 128), (Region{0, 0, 76, 76}));
  EXPECT_EQ(expand_region(Region{64, 64, 128, 128}, 0.2, 128, 128), (Region{52, 52, 128, 128}));
  // Floor: 10 * 0.15 = 1.5 -> 1; height 7 * 0.15 -> 1.
  EXPECT_EQ(expand_region(Region{10, 10, 20, 17}, 0.15, 100, 100), (Region{9, 9, 21, 18}));
}

TEST(ExpandRegionTest, Monotone) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t w = 1 + rng.below(100), h = 1 + rng.below(100);
    const std::size_t x0 = rng.below(w), y0 = rng.below(h);
    const Region r{x0, y0, x0 + 1 + rng.below(w - x0), y0 + 1 + rng.below(h - y0)};
    const auto e = expand_region(r, rng.uniform(0.0, 1.5), w, h);
    EXPECT_TRUE(e.contains(r));
    EXPECT_LE(e.x_end, w);
    EXPECT_LE(e.y_end, h);
  }
}

TEST(MergeTest, Examples) {
  EXPECT_TRUE(merge_duplicate_centers({}, 2.0).empty());
  EXPECT_EQ(merge_duplicate_centers({{10, 10, 0.9f}, {11, 10, 0.8f}}, 2.0), (PeakSet{{10, 10, 0.9f}}));
  EXPECT_EQ(merge_duplicate_centers({{10, 10, 0.9f}, {20, 20, 0.8f}}, 2.0).size(), 2u);
  // Distance exactly gamma is merged.
  EXPECT_EQ(merge_duplicate_centers({{0, 0, 1.0f}, {3, 4, 1.0f}}, 5.0).size(), 1u);
  // Input order decides the survivor, and removed centers do not chain.
  EXPECT_EQ(merge_duplicate_centers({{2, 0, 1.0f}, {0, 0, 1.0f}, {4, 0, 1.0f}}, 2.0), (PeakSet{{2, 0, 1.0f}}));
  EXPECT_EQ(merge_duplicate_centers({{0, 0, 1.0f}, {2, 0, 1.0f}, {4, 0, 1.0f}}, 2.0),
            (PeakSet{{0, 0, 1.0f}, {4, 0, 1.0f}}));
}

TEST(MergeTest, Properties) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    PeakSet in;
    const std::size_t n = rng.below(40);
    for (std::size_t i = 0; i < n; ++i) in.push_back({rng.below(30), rng.below(30), 1.0f});
    const double gamma = rng.uniform(0.5, 8.0);
    const auto out = merge_duplicate_centers(in, gamma);
    EXPECT_LE(out.size(), in.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = i + 1; j < out.size(); ++j) EXPECT_GT(dist(out[i], out[j]), gamma);
    }
    EXPECT_EQ(merge_duplicate_centers(out, gamma), out);
    // Every input center is within gamma of some kept center.
    for (const auto& p : in) {
      bool covered = false;
      for (const auto& q : out) covered = covered || dist(p, q) <= gamma;
      EXPECT_TRUE(covered);
    }
  }
}

TEST(InferWithOverlapTest, SingleRegionEqualsWholeGridCount) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hm = testing::random_heatmap(rng, 2, 4 + rng.below(30), 4 + rng.below(30), trial % 2 ? 5 : 0);
    const ThresholdPolicy policy{rng.uniform(0.1, 0.9),
                                 trial % 3 ? ThresholdMode::DynamicOtsu : ThresholdMode::Fixed};
    const CounterConfig cfg{1, rng.uniform(0.0, 0.5), rng.uniform(0.5, 10.0), policy};
    const auto a = infer_with_overlap(hm, cfg);
    const auto b = count_from_heatmap(hm, policy);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.peaks, b.peaks);
  }
}

TEST(InferWithOverlapTest, ZeroOverlapTinyGammaEqualsPlainPartitioning) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hm = testing::random_heatmap(rng, 2, 9 + rng.below(30), 9 + rng.below(30), trial % 2 ? 5 : 0);
    const std::size_t pts[] = {1, 2, 4, 9};
    const CounterConfig cfg{pts[rng.below(4)], 0.0, 1e-9, {0.5, ThresholdMode::DynamicOtsu}};
    EXPECT_EQ(infer_with_overlap(hm, cfg).counts, infer_partitioned(hm, cfg).counts);
  }
}

TEST(InferWithOverlapTest, CenterNextToSeamCountedOnce) {
  const ClassCatalog cat({"car"});
  const FrameAnnotation ann{"f", 64, 64, {{0, 31.0, 20.0, 3.0}}};
  const auto hm = render_target_heatmap(ann, cat);
  const CounterConfig overlap{4, 0.2, 3.0, {0.5, ThresholdMode::DynamicOtsu}};
  const auto r = infer_with_overlap(hm, overlap);
  EXPECT_EQ(r.counts[0], 1u);
  ASSERT_EQ(r.peaks[0].size(), 1u);
  EXPECT_EQ(r.peaks[0][0].x, 31u);
  EXPECT_EQ(r.peaks[0][0].y, 20u);
  // Without expansion the right-hand region sees the Gaussian flank as a peak.
  EXPECT_EQ(infer_partitioned(hm, overlap).counts[0], 2u);
}

TEST(InferWithOverlapTest, DenseSmallObjectsNinePartitions) {
  const ClassCatalog cat({"pedestrian", "traffic_cone"});
  SplitMix64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ann = testing::separated_annotation(rng, 2, 20, 60, 60, 1.0, 3.0);
    const auto hm = render_target_heatmap(ann, cat);
    const CounterConfig cfg{9, 0.2, default_merge_radius(1.0), {0.5, ThresholdMode::DynamicOtsu}};
    EXPECT_EQ(infer_with_overlap(hm, cfg).counts, annotation_counts(ann, cat));
  }
}

TEST(InferWithOverlapTest, RejectsBadConfig) {
  const Heatmap hm(1, 4, 4);
  EXPECT_THROW(infer_with_overlap(hm, {0, 0.2, 1.0, {}}), InvalidArgument);
  EXPECT_THROW(infer_with_overlap(hm, {4, -0.1, 1.0, {}}), InvalidArgument);
  EXPECT_THROW(infer_with_overlap(hm, {4, 0.2, 0.0, {}}), InvalidArgument);
  EXPECT_THROW(infer_with_overlap(hm, {25, 0.2, 1.0, {}}), InvalidArgument);
}

TEST(PartitionWeightsTest, Examples) {
  const std::vector<std::size_t> zero{0, 0, 0, 0};
  EXPECT_EQ(partition_weights(zero), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  const std::vector<std::size_t> counts{3, 1, 0, 0};
  EXPECT_EQ(partition_weights(counts), (std::vector<double>{1.0, 0.5, 0.25, 0.25}));
  const std::vector<std::size_t> single{7};
  EXPECT_EQ(partition_weights(single), (std::vector<double>{2.0}));
}

TEST(PartitionWeightsTest, SumIdentity) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> counts(1 + rng.below(16));
    for (auto& c : counts) c = rng.below(3) == 0 ? 0 : rng.below(1000);
    const auto w = partition_weights(counts);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    const bool any = std::accumulate(counts.begin(), counts.end(), std::size_t{0}) > 0;
    EXPECT_NEAR(sum, any ? 2.0 : 1.0, 1e-12);
  }
}

TEST(RegionObjectCountsTest, AssignsByCoreRegion) {
  const auto regions = partition_regions(10, 10, 4);
  const std::vector<ObjectCenter> centers{{0, 1, 1, 1}, {0, 6, 1, 1}, {0, 7, 8, 1}, {0, 9.7, 9.8, 1}};
  EXPECT_EQ(region_object_counts(regions, centers), (std::vector<std::size_t>{1, 1, 0, 2}));
}

}  // namespace
}  // namespace pcq
