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
#include <string>
#include <vector>

#include "pcq/heatmap.hpp"
#include "pcq/partition.hpp"

namespace pcq {

/// Fixed-length frame feature vector, K + 3 entries:
///   [0, K)  per-class counts from the reference counter (pt = 1, t = 0.5)
///   K       total peak count
///   K + 1   fraction of cells whose max-over-channels activation is >= 0.1
///   K + 2   mean activation over all channels and cells
using Descriptor = std::vector<double>;

constexpr double kOccupancyLevel = 0.1;
constexpr double kDefaultEpsilon = 0.15;

/// `class_weights` scales the K count components (empty = all 1).
Descriptor describe_frame(const Heatmap& hm, std::span<const double> class_weights = {});

/// For each frame, the index of the model whose per-class counts have the
/// smallest summed L1 error against truth; the earliest model wins ties.
/// predictions[frame][model] is that model's count vector.
std::vector<std::size_t> best_models(const std::vector<std::vector<std::vector<std::size_t>>>& predictions,
                                     const std::vector<std::vector<std::size_t>>& truth);

/// Groups frame indices by best model: result[model] = frames assigned to it.
std::vector<std::vector<std::size_t>> assign_frames(
    const std::vector<std::vector<std::vector<std::size_t>>>& predictions,
    const std::vector<std::vector<std::size_t>>& truth, std::size_t model_count);

struct CenterEstimate {
  Descriptor mean;
  /// Mean squared Euclidean deviation from `mean`.
  double variance = 0.0;
  std::size_t n = 0;
};

/// n == 0 yields an empty estimate, which selection treats as ineligible.
CenterEstimate estimate_center(std::span<const Descriptor> descriptors);

/// exp(-n eps^2 / (2 xi^2)); 0 when xi^2 == 0. Throws for n == 0 or eps <= 0.
double chernoff_confidence(std::size_t n, double variance, double epsilon);

struct ModelCenter {
  CounterConfig config;
  Descriptor center;
  double variance = 0.0;
  std::size_t n = 0;
  double confidence = 0.0;

  bool eligible() const { return n > 0; }
  bool operator==(const ModelCenter&) const = default;
};

/// Builds one center per model from training descriptors and the frame
/// assignment.
std::vector<ModelCenter> fit_model_centers(std::span<const CounterConfig> models,
                                           std::span<const Descriptor> descriptors,
                                           const std::vector<std::vector<std::size_t>>& assignment,
                                           double epsilon);

/// argmin over eligible models of ||f - center|| * confidence; the earliest
/// model wins ties. Throws when no model is eligible.
std::size_t select_model_index(const Descriptor& f, std::span<const ModelCenter> centers);
const CounterConfig& select_model(const Descriptor& f, std::span<const ModelCenter> centers);

struct ModelRegistry {
  double epsilon = kDefaultEpsilon;
  std::vector<double> class_weights;
  std::vector<ModelCenter> models;

  bool operator==(const ModelRegistry&) const = default;
};

std::string registry_to_json(const ModelRegistry& registry);
ModelRegistry registry_from_json(const std::string& text);
void save_registry(const std::string& path, const ModelRegistry& registry);
ModelRegistry load_registry(const std::string& path);

}  // namespace pcq
