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

#include <cstdint>
#include <vector>

#include "pcq/heatmap.hpp"

namespace pcq {

/// Stand-in for the error of a trained heatmap network. Per-class rates are
/// indexed by class; an empty vector means 0 and a single entry applies to
/// every class.
struct NoiseProfile {
  double blur_sigma = 0.0;
  double additive_noise = 0.0;
  std::vector<double> drop_rate;
  std::vector<double> false_positive_rate;
  /// Depth of the multiplicative dip applied along partition seams, in [0, 1]
  /// after clamping. Models a partitioned network splitting objects that
  /// straddle a seam.
  double boundary_split_bias = 0.0;
  /// Partition count whose interior seams receive the dip (1 = no seams).
  std::size_t seam_partitions = 1;
  std::uint64_t seed = 0;

  double drop_rate_for(std::size_t c) const;
  double false_positive_rate_for(std::size_t c) const;
  /// Throws InvalidArgument when a rate leaves [0, 1] or a magnitude is negative.
  void validate() const;
};

/// Perturbs a target heatmap. Stages run in a fixed order so seeded output
/// is reproducible:
///
///   1. drop:    one uniform per annotated center (annotation order); a
///               center is removed when u < drop_rate of its class, and the
///               affected channels are re-rendered from the survivors.
///   2. inject:  per class, one uniform; when u < false_positive_rate a
///               spurious peak is splatted on a uniform cell (x, then y)
///               with amplitude uniform in [0.55, 1] and extent 2.
///   3. blur:    separable Gaussian, radius ceil(3 sigma), edge clamped.
///   4. seams:   v *= 1 - b * exp(-d^2 / 2), d = distance to nearest seam line.
///   5. additive: v += a * (2u - 1), one uniform per cell, channel-major.
///   6. clamp to [0, 1].
///
/// Stages whose parameter is zero draw no random numbers.
Heatmap simulate_prediction(const Heatmap& target, const FrameAnnotation& ann,
                            const NoiseProfile& profile);

}  // namespace pcq
