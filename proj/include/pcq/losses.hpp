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
#include <functional>
#include <span>
#include <vector>

#include "pcq/heatmap.hpp"

namespace pcq {

/// Probability clamp applied to predictions before taking logs.
constexpr double kFocalEps = 1e-6;

struct FocalLoss {
  double loss = 0.0;
  /// dL/dY_hat per cell, same layout as the prediction. Zero where the
  /// prediction lies outside the clamp interval.
  std::vector<double> gradient;
  std::size_t positives = 0;
};

/// Heatmap focal loss with normalization N = max(#positives, 1):
///
///   Y == 1 :  -(1 - p)^alpha * log(p)
///   else   :  -(1 - Y)^alpha * log(1 - p)
///
/// with p = clamp(Y_hat, eps, 1 - eps). The negative branch carries no
/// p^alpha factor.
FocalLoss focal_loss(std::span<const double> pred, std::span<const double> target, double alpha = 2.0);
FocalLoss focal_loss(const Heatmap& pred, const Heatmap& target, double alpha = 2.0);

/// Per-frame, per-class counts: counts[frame][class].
using CountMatrix = std::vector<std::vector<std::size_t>>;

/// Mean absolute count error over frames and classes.
double count_l1(const CountMatrix& pred, const CountMatrix& truth);

/// sum_i w_i * region_losses[i] with w from partition_weights(region_counts).
double weighted_count_loss(std::span<const double> region_losses,
                           std::span<const std::size_t> region_counts);

struct LossReport {
  double l_hm = 0.0;
  double l_count = 0.0;
  double total = 0.0;
  std::size_t n_pos = 0;
};

/// Focal loss over the heatmaps plus count L1 over the count matrices.
LossReport total_loss(const Heatmap& pred, const Heatmap& target, const CountMatrix& pred_counts,
                      const CountMatrix& true_counts, double alpha = 2.0);

using ScalarFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

/// Central differences with step h against the analytic gradient. Returns
/// max_i |analytic_i - numeric_i| / max(|analytic_i|, 1e-8).
double grad_check(const ScalarFn& f, const GradientFn& grad, std::span<const double> point, double h);

}  // namespace pcq
