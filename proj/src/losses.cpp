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

#include "pcq/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "pcq/error.hpp"
#include "pcq/partition.hpp"

namespace pcq {

FocalLoss focal_loss(std::span<const double> pred, std::span<const double> target, double alpha) {
  if (pred.size() != target.size()) {
    throw InvalidArgument(fmt::format("focal loss shape mismatch: {} vs {}", pred.size(), target.size()));
  }
  FocalLoss out;
  out.gradient.resize(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double raw = pred[i];
    const double p = std::clamp(raw, kFocalEps, 1.0 - kFocalEps);
    const bool inside = raw >= kFocalEps && raw <= 1.0 - kFocalEps;
    if (target[i] == 1.0) {
      ++out.positives;
      const double q = 1.0 - p;
      sum += -std::pow(q, alpha) * std::log(p);
      out.gradient[i] = inside ? alpha * std::pow(q, alpha - 1.0) * std::log(p) - std::pow(q, alpha) / p : 0.0;
    } else {
      const double m = std::pow(1.0 - target[i], alpha);
      sum += -m * std::log(1.0 - p);
      out.gradient[i] = inside ? m / (1.0 - p) : 0.0;
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(out.positives, 1));
  out.loss = sum / n;
  for (double& g : out.gradient) g /= n;
  return out;
}

FocalLoss focal_loss(const Heatmap& pred, const Heatmap& target, double alpha) {
  if (pred.channels() != target.channels() || pred.height() != target.height() ||
      pred.width() != target.width()) {
    throw InvalidArgument(fmt::format("focal loss shape mismatch: {}x{}x{} vs {}x{}x{}",
                                      pred.channels(), pred.height(), pred.width(), target.channels(),
                                      target.height(), target.width()));
  }
  const std::vector<double> p(pred.values().begin(), pred.values().end());
  const std::vector<double> t(target.values().begin(), target.values().end());
  return focal_loss(p, t, alpha);
}

double count_l1(const CountMatrix& pred, const CountMatrix& truth) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument(fmt::format("count loss frame mismatch: {} vs {}", pred.size(), truth.size()));
  }
  if (truth.empty()) return 0.0;
  const std::size_t classes = truth.front().size();
  if (classes == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t f = 0; f < truth.size(); ++f) {
    if (pred[f].size() != classes || truth[f].size() != classes) {
      throw InvalidArgument(fmt::format("count loss class mismatch in frame {}", f));
    }
    for (std::size_t c = 0; c < classes; ++c) {
      sum += std::abs(static_cast<double>(pred[f][c]) - static_cast<double>(truth[f][c]));
    }
  }
  return sum / static_cast<double>(classes) / static_cast<double>(truth.size());
}

double weighted_count_loss(std::span<const double> region_losses,
                           std::span<const std::size_t> region_counts) {
  if (region_losses.size() != region_counts.size()) {
    throw InvalidArgument("weighted count loss needs one count per region loss");
  }
  const auto weights = partition_weights(region_counts);
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * region_losses[i];
  return total;
}

LossReport total_loss(const Heatmap& pred, const Heatmap& target, const CountMatrix& pred_counts,
                      const CountMatrix& true_counts, double alpha) {
  const auto focal = focal_loss(pred, target, alpha);
  LossReport r;
  r.l_hm = focal.loss;
  r.n_pos = focal.positives;
  r.l_count = count_l1(pred_counts, true_counts);
  r.total = r.l_hm + r.l_count;
  return r;
}

double grad_check(const ScalarFn& f, const GradientFn& grad, std::span<const double> point, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be > 0");
  const auto analytic = grad(point);
  if (analytic.size() != point.size()) throw InvalidArgument("gradient size mismatch");
  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]), 1e-8);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace pcq
