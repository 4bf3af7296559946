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

#include "pcq/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pcq/error.hpp"
#include "pcq/partition.hpp"
#include "pcq/rng.hpp"

namespace pcq {

namespace {

double rate_at(const std::vector<double>& rates, std::size_t c) {
  if (rates.empty()) return 0.0;
  if (rates.size() == 1) return rates.front();
  return c < rates.size() ? rates[c] : 0.0;
}

constexpr double kSpuriousExtent = 2.0;

void splat_scaled(std::span<float> channel, std::size_t width, std::size_t height, double cx,
                  double cy, double amplitude) {
  const double sigma = kSpuriousExtent / 3.0;
  const double two_var = 2.0 * sigma * sigma;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const auto g = static_cast<float>(amplitude * std::exp(-(dx * dx + dy * dy) / two_var));
      float& cell = channel[y * width + x];
      cell = std::max(cell, g);
    }
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(radius);
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

void blur_channel(std::span<float> channel, std::size_t width, std::size_t height, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(width);
  const auto h = static_cast<std::ptrdiff_t>(height);
  std::vector<double> tmp(channel.size());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const auto xx = std::clamp<std::ptrdiff_t>(x + i, 0, w - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * channel[static_cast<std::size_t>(y * w + xx)];
      }
      tmp[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const auto yy = std::clamp<std::ptrdiff_t>(y + i, 0, h - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(yy * w + x)];
      }
      channel[static_cast<std::size_t>(y * w + x)] = static_cast<float>(acc);
    }
  }
}

// Per-cell multiplicative factor for the seam dip, row-major.
std::vector<float> seam_factors(std::size_t width, std::size_t height, std::size_t partitions,
                                double depth) {
  std::vector<double> xs, ys;
  for (const auto& r : partition_regions(width, height, partitions)) {
    if (r.x_start > 0) xs.push_back(static_cast<double>(r.x_start) - 0.5);
    if (r.y_start > 0) ys.push_back(static_cast<double>(r.y_start) - 0.5);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<float> factors(width * height, 1.0f);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double d = std::numeric_limits<double>::infinity();
      for (double lx : xs) d = std::min(d, std::abs(static_cast<double>(x) - lx));
      for (double ly : ys) d = std::min(d, std::abs(static_cast<double>(y) - ly));
      if (std::isinf(d)) continue;
      factors[y * width + x] = static_cast<float>(1.0 - depth * std::exp(-0.5 * d * d));
    }
  }
  return factors;
}

}  // namespace

double NoiseProfile::drop_rate_for(std::size_t c) const { return rate_at(drop_rate, c); }

double NoiseProfile::false_positive_rate_for(std::size_t c) const {
  return rate_at(false_positive_rate, c);
}

void NoiseProfile::validate() const {
  auto check_rates = [](const std::vector<double>& rates, const char* name) {
    for (double r : rates) {
      if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument(fmt::format("{} {} outside [0,1]", name, r));
    }
  };
  check_rates(drop_rate, "drop_rate");
  check_rates(false_positive_rate, "false_positive_rate");
  if (!(additive_noise >= 0.0 && additive_noise <= 1.0)) {
    throw InvalidArgument(fmt::format("additive_noise {} outside [0,1]", additive_noise));
  }
  if (!(blur_sigma >= 0.0)) throw InvalidArgument("blur_sigma must be >= 0");
  if (!(boundary_split_bias >= 0.0)) throw InvalidArgument("boundary_split_bias must be >= 0");
  if (seam_partitions == 0) throw InvalidArgument("seam_partitions must be >= 1");
}

Heatmap simulate_prediction(const Heatmap& target, const FrameAnnotation& ann,
                            const NoiseProfile& profile) {
  profile.validate();
  const std::size_t width = target.width();
  const std::size_t height = target.height();
  const std::size_t channels = target.channels();
  Heatmap out = target;
  SplitMix64 rng(profile.seed);

  // 1. drop
  std::vector<bool> dirty(channels, false);
  std::vector<std::vector<ObjectCenter>> kept(channels);
  for (const auto& c : ann.centers) {
    if (c.class_index >= channels) {
      throw InvalidArgument(fmt::format("center class {} exceeds {} channels", c.class_index, channels));
    }
    const double u = rng.uniform();
    if (u < profile.drop_rate_for(c.class_index)) {
      dirty[c.class_index] = true;
    } else {
      kept[c.class_index].push_back(c);
    }
  }
  for (std::size_t k = 0; k < channels; ++k) {
    if (!dirty[k]) continue;
    auto values = out.channel_values(k);
    std::fill(values.begin(), values.end(), 0.0f);
    splat_centers(values, width, height, kept[k]);
  }

  // 2. inject
  for (std::size_t k = 0; k < channels; ++k) {
    const double rate = profile.false_positive_rate_for(k);
    if (rate <= 0.0) continue;
    if (rng.uniform() >= rate) continue;
    const auto x = static_cast<double>(rng.below(width));
    const auto y = static_cast<double>(rng.below(height));
    const double amplitude = rng.uniform(0.55, 1.0);
    splat_scaled(out.channel_values(k), width, height, x, y, amplitude);
  }

  // 3. blur
  if (profile.blur_sigma > 0.0) {
    for (std::size_t k = 0; k < channels; ++k) {
      blur_channel(out.channel_values(k), width, height, profile.blur_sigma);
    }
  }

  // 4. seams
  const double depth = std::min(profile.boundary_split_bias, 1.0);
  if (depth > 0.0 && profile.seam_partitions > 1) {
    const auto factors = seam_factors(width, height, profile.seam_partitions, depth);
    for (std::size_t k = 0; k < channels; ++k) {
      auto values = out.channel_values(k);
      for (std::size_t i = 0; i < values.size(); ++i) values[i] *= factors[i];
    }
  }

  // 5. additive
  if (profile.additive_noise > 0.0) {
    for (std::size_t k = 0; k < channels; ++k) {
      for (float& v : out.channel_values(k)) {
        v += static_cast<float>(profile.additive_noise * (2.0 * rng.uniform() - 1.0));
      }
    }
  }

  // 6. clamp
  for (std::size_t k = 0; k < channels; ++k) {
    for (float& v : out.channel_values(k)) v = std::clamp(v, 0.0f, 1.0f);
  }
  return out;
}

}  // namespace pcq
