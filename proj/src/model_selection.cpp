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

#include "pcq/model_selection.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "pcq/error.hpp"
#include "pcq/peaks.hpp"

namespace pcq {

using nlohmann::json;

Descriptor describe_frame(const Heatmap& hm, std::span<const double> class_weights) {
  const std::size_t k = hm.channels();
  if (!class_weights.empty() && class_weights.size() != k) {
    throw InvalidArgument(fmt::format("{} class weights for {} channels", class_weights.size(), k));
  }
  const auto ref = count_from_heatmap(hm, ThresholdPolicy{0.5, ThresholdMode::Fixed});
  Descriptor d(k + 3, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double w = class_weights.empty() ? 1.0 : class_weights[c];
    d[c] = w * static_cast<double>(ref.counts[c]);
    total += static_cast<double>(ref.counts[c]);
  }
  d[k] = total;

  std::size_t occupied = 0;
  for (std::size_t y = 0; y < hm.height(); ++y) {
    for (std::size_t x = 0; x < hm.width(); ++x) {
      float m = 0.0f;
      for (std::size_t c = 0; c < k; ++c) m = std::max(m, hm.at(c, y, x));
      if (m >= kOccupancyLevel) ++occupied;
    }
  }
  d[k + 1] = hm.cells() ? static_cast<double>(occupied) / static_cast<double>(hm.cells()) : 0.0;
  double sum = 0.0;
  for (float v : hm.values()) sum += v;
  d[k + 2] = hm.values().empty() ? 0.0 : sum / static_cast<double>(hm.values().size());
  return d;
}

std::vector<std::size_t> best_models(const std::vector<std::vector<std::vector<std::size_t>>>& predictions,
                                     const std::vector<std::vector<std::size_t>>& truth) {
  if (predictions.size() != truth.size()) {
    throw InvalidArgument(fmt::format("{} prediction rows for {} frames", predictions.size(), truth.size()));
  }
  std::vector<std::size_t> best(truth.size(), 0);
  for (std::size_t f = 0; f < truth.size(); ++f) {
    if (predictions[f].empty()) throw InvalidArgument("frame has no model predictions");
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < predictions[f].size(); ++m) {
      const auto& pred = predictions[f][m];
      if (pred.size() != truth[f].size()) throw InvalidArgument("prediction/truth class mismatch");
      double err = 0.0;
      for (std::size_t c = 0; c < pred.size(); ++c) {
        err += std::abs(static_cast<double>(pred[c]) - static_cast<double>(truth[f][c]));
      }
      if (-err > best_score) {
        best_score = -err;
        best[f] = m;
      }
    }
  }
  return best;
}

std::vector<std::vector<std::size_t>> assign_frames(
    const std::vector<std::vector<std::vector<std::size_t>>>& predictions,
    const std::vector<std::vector<std::size_t>>& truth, std::size_t model_count) {
  std::vector<std::vector<std::size_t>> sets(model_count);
  const auto best = best_models(predictions, truth);
  for (std::size_t f = 0; f < best.size(); ++f) {
    if (best[f] >= model_count) throw InvalidArgument("more predictions than models");
    sets[best[f]].push_back(f);
  }
  return sets;
}

CenterEstimate estimate_center(std::span<const Descriptor> descriptors) {
  CenterEstimate est;
  est.n = descriptors.size();
  if (est.n == 0) return est;
  const std::size_t dim = descriptors.front().size();
  est.mean.assign(dim, 0.0);
  for (const auto& d : descriptors) {
    if (d.size() != dim) throw InvalidArgument("descriptor length mismatch");
    for (std::size_t i = 0; i < dim; ++i) est.mean[i] += d[i];
  }
  for (double& v : est.mean) v /= static_cast<double>(est.n);
  for (const auto& d : descriptors) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double diff = d[i] - est.mean[i];
      est.variance += diff * diff;
    }
  }
  est.variance /= static_cast<double>(est.n);
  return est;
}

double chernoff_confidence(std::size_t n, double variance, double epsilon) {
  if (n == 0) throw InvalidArgument("chernoff confidence needs n >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("chernoff confidence needs epsilon > 0");
  if (!(variance >= 0.0)) throw InvalidArgument("variance must be >= 0");
  if (variance == 0.0) return 0.0;
  return std::exp(-static_cast<double>(n) * epsilon * epsilon / (2.0 * variance));
}

std::vector<ModelCenter> fit_model_centers(std::span<const CounterConfig> models,
                                           std::span<const Descriptor> descriptors,
                                           const std::vector<std::vector<std::size_t>>& assignment,
                                           double epsilon) {
  if (assignment.size() != models.size()) throw InvalidArgument("one assignment set per model required");
  std::vector<ModelCenter> out;
  out.reserve(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    std::vector<Descriptor> assigned;
    assigned.reserve(assignment[m].size());
    for (std::size_t f : assignment[m]) {
      if (f >= descriptors.size()) throw InvalidArgument("assigned frame index out of range");
      assigned.push_back(descriptors[f]);
    }
    const auto est = estimate_center(assigned);
    ModelCenter mc;
    mc.config = models[m];
    mc.center = est.mean;
    mc.variance = est.variance;
    mc.n = est.n;
    mc.confidence = est.n > 0 ? chernoff_confidence(est.n, est.variance, epsilon) : 0.0;
    out.push_back(std::move(mc));
  }
  return out;
}

std::size_t select_model_index(const Descriptor& f, std::span<const ModelCenter> centers) {
  std::size_t best = centers.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < centers.size(); ++m) {
    const auto& mc = centers[m];
    if (!mc.eligible()) continue;
    if (mc.center.size() != f.size()) {
      throw InvalidArgument(fmt::format("descriptor length {} vs model center {}", f.size(), mc.center.size()));
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) d2 += (f[i] - mc.center[i]) * (f[i] - mc.center[i]);
    const double adjusted = std::sqrt(d2) * mc.confidence;
    if (best == centers.size() || adjusted < best_d) {
      best = m;
      best_d = adjusted;
    }
  }
  if (best == centers.size()) throw InvalidArgument("no eligible model to select from");
  return best;
}

const CounterConfig& select_model(const Descriptor& f, std::span<const ModelCenter> centers) {
  return centers[select_model_index(f, centers)].config;
}

namespace {

json config_json(const CounterConfig& c) {
  return {{"pt", c.partitions},
          {"overlap", c.overlap_ratio},
          {"gamma", c.merge_radius},
          {"threshold_mode", c.threshold.mode == ThresholdMode::Fixed ? "fixed" : "otsu"},
          {"fixed_t", c.threshold.fixed_t}};
}

CounterConfig config_from(const json& j) {
  CounterConfig c;
  c.partitions = j.at("pt").get<std::size_t>();
  c.overlap_ratio = j.at("overlap").get<double>();
  c.merge_radius = j.at("gamma").get<double>();
  const auto mode = j.at("threshold_mode").get<std::string>();
  if (mode == "fixed") {
    c.threshold.mode = ThresholdMode::Fixed;
  } else if (mode == "otsu") {
    c.threshold.mode = ThresholdMode::DynamicOtsu;
  } else {
    throw DataError(fmt::format("unknown threshold mode '{}'", mode));
  }
  c.threshold.fixed_t = j.at("fixed_t").get<double>();
  c.validate();
  return c;
}

}  // namespace

std::string registry_to_json(const ModelRegistry& registry) {
  json models = json::array();
  for (const auto& m : registry.models) {
    models.push_back({{"config", config_json(m.config)},
                      {"w_hat", m.center},
                      {"xi2", m.variance},
                      {"n", m.n},
                      {"P", m.confidence},
                      {"epsilon", registry.epsilon}});
  }
  json doc = {{"epsilon", registry.epsilon}, {"class_weights", registry.class_weights}, {"models", models}};
  return doc.dump(2) + "\n";
}

ModelRegistry registry_from_json(const std::string& text) {
  try {
    const auto doc = json::parse(text);
    ModelRegistry r;
    r.epsilon = doc.at("epsilon").get<double>();
    r.class_weights = doc.value("class_weights", std::vector<double>{});
    for (const auto& m : doc.at("models")) {
      ModelCenter mc;
      mc.config = config_from(m.at("config"));
      mc.center = m.at("w_hat").get<Descriptor>();
      mc.variance = m.at("xi2").get<double>();
      mc.n = m.at("n").get<std::size_t>();
      mc.confidence = m.at("P").get<double>();
      if (mc.variance < 0.0 || mc.confidence < 0.0 || mc.confidence > 1.0) {
        throw DataError("model center has variance < 0 or P outside [0,1]");
      }
      r.models.push_back(std::move(mc));
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("malformed model registry: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw DataError(fmt::format("malformed model registry: {}", e.what()));
  }
}

void save_registry(const std::string& path, const ModelRegistry& registry) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path));
  out << registry_to_json(registry);
}

ModelRegistry load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return registry_from_json(ss.str());
}

}  // namespace pcq
