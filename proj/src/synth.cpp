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

#include "pcq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "pcq/error.hpp"
#include "pcq/rng.hpp"

namespace pcq {

using ordered_json = nlohmann::ordered_json;

ClassCatalog SceneProfile::catalog() const {
  std::vector<std::string> names;
  for (const auto& c : classes) names.push_back(c.name);
  return ClassCatalog(std::move(names));
}

double SceneProfile::max_extent() const {
  double m = 0.0;
  for (const auto& c : classes) m = std::max(m, c.extent_hi);
  return m;
}

void SceneProfile::validate() const {
  if (classes.empty()) throw InvalidArgument("scene profile has no classes");
  (void)catalog();
  for (const auto& c : classes) {
    if (c.buckets.empty() || c.buckets.size() != c.masses.size()) {
      throw InvalidArgument(fmt::format("class '{}': buckets and masses must be non-empty and equal length", c.name));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < c.buckets.size(); ++i) {
      if (c.buckets[i].lo > c.buckets[i].hi) {
        throw InvalidArgument(fmt::format("class '{}': bucket {} has lo > hi", c.name, i));
      }
      if (!(c.masses[i] >= 0.0)) throw InvalidArgument(fmt::format("class '{}': negative mass", c.name));
      total += c.masses[i];
    }
    if (!(total > 0.0)) throw InvalidArgument(fmt::format("class '{}': masses sum to zero", c.name));
    if (!(c.extent_lo > 0.0 && c.extent_lo <= c.extent_hi)) {
      throw InvalidArgument(fmt::format("class '{}': extent range must satisfy 0 < lo <= hi", c.name));
    }
    if (!(c.min_sep >= 0.0)) throw InvalidArgument(fmt::format("class '{}': min_sep must be >= 0", c.name));
  }
}

SceneProfile parse_profile(const std::string& json_text) {
  try {
    const auto doc = ordered_json::parse(json_text);
    if (!doc.is_object()) throw DataError("scene profile must be a JSON object keyed by class");
    SceneProfile p;
    for (const auto& [name, spec] : doc.items()) {
      ClassProfile c;
      c.name = name;
      for (const auto& b : spec.at("buckets")) {
        if (b.is_array() && b.size() == 2) {
          c.buckets.push_back({b[0].get<std::size_t>(), b[1].get<std::size_t>()});
        } else {
          const auto v = b.get<std::size_t>();
          c.buckets.push_back({v, v});
        }
      }
      c.masses = spec.at("masses").get<std::vector<double>>();
      const auto extent = spec.at("extent").get<std::vector<double>>();
      if (extent.size() != 2) throw DataError(fmt::format("class '{}': extent must be [lo, hi]", name));
      c.extent_lo = extent[0];
      c.extent_hi = extent[1];
      c.min_sep = spec.at("min_sep").get<double>();
      const auto placement = spec.value("placement", std::string("min_sep"));
      if (placement == "min_sep") {
        c.placement = Placement::MinSeparation;
      } else if (placement == "clustered") {
        c.placement = Placement::Clustered;
      } else {
        throw DataError(fmt::format("class '{}': unknown placement '{}'", name, placement));
      }
      p.classes.push_back(std::move(c));
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("malformed scene profile: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw DataError(fmt::format("invalid scene profile: {}", e.what()));
  }
}

std::string profile_to_json(const SceneProfile& profile) {
  ordered_json doc = ordered_json::object();
  for (const auto& c : profile.classes) {
    ordered_json buckets = ordered_json::array();
    for (const auto& b : c.buckets) buckets.push_back({b.lo, b.hi});
    ordered_json spec;
    spec["buckets"] = std::move(buckets);
    spec["masses"] = c.masses;
    spec["extent"] = {c.extent_lo, c.extent_hi};
    spec["min_sep"] = c.min_sep;
    spec["placement"] = c.placement == Placement::Clustered ? "clustered" : "min_sep";
    doc[c.name] = std::move(spec);
  }
  return doc.dump(2) + "\n";
}

SceneProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open profile '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_profile(ss.str());
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path, e.what()));
  }
}

namespace {

constexpr int kPlacementAttempts = 200;

std::size_t draw_bucket(SplitMix64& rng, const std::vector<double>& masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    acc += masses[i];
    if (u < acc) return i;
  }
  // Rounding at the top end: last bucket with positive mass.
  for (std::size_t i = masses.size(); i-- > 0;) {
    if (masses[i] > 0.0) return i;
  }
  return 0;
}

bool separated(const std::vector<ObjectCenter>& placed, double x, double y, double min_sep) {
  const double s2 = min_sep * min_sep;
  for (const auto& p : placed) {
    const double dx = p.x - x, dy = p.y - y;
    if (dx * dx + dy * dy < s2) return false;
  }
  return true;
}

}  // namespace

FrameAnnotation generate_frame(const SceneProfile& profile, std::size_t index, std::size_t width,
                               std::size_t height, std::uint64_t seed, GenerateStats* stats) {
  SplitMix64 rng(derive_seed(seed, index));
  FrameAnnotation ann;
  ann.frame_id = fmt::format("frame_{:06}", index);
  ann.width = width;
  ann.height = height;
  const double max_x = static_cast<double>(width - 1);
  const double max_y = static_cast<double>(height - 1);
  bool reduced = false;
  for (std::size_t k = 0; k < profile.classes.size(); ++k) {
    const auto& cp = profile.classes[k];
    const auto& bucket = cp.buckets[draw_bucket(rng, cp.masses)];
    const auto n = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(bucket.lo), static_cast<std::int64_t>(bucket.hi)));
    std::vector<ObjectCenter> placed;
    std::vector<std::pair<double, double>> seeds;
    if (cp.placement == Placement::Clustered) {
      const std::size_t n_seeds = 1 + n / 8;
      for (std::size_t s = 0; s < n_seeds; ++s) seeds.emplace_back(rng.uniform(0.0, max_x), rng.uniform(0.0, max_y));
    }
    const double spread = std::max(3.0 * cp.min_sep, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      bool ok = false;
      for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
        double x, y;
        if (cp.placement == Placement::Clustered) {
          const auto& s = seeds[static_cast<std::size_t>(rng.below(seeds.size()))];
          x = std::clamp(s.first + spread * rng.normal(), 0.0, max_x);
          y = std::clamp(s.second + spread * rng.normal(), 0.0, max_y);
        } else {
          x = rng.uniform(0.0, max_x);
          y = rng.uniform(0.0, max_y);
        }
        if (!separated(placed, x, y, cp.min_sep)) continue;
        const double extent = cp.extent_lo == cp.extent_hi ? cp.extent_lo : rng.uniform(cp.extent_lo, cp.extent_hi);
        placed.push_back({k, x, y, extent});
        ok = true;
      }
      if (!ok) {
        if (stats) stats->reduced_objects += n - i;
        reduced = true;
        break;
      }
    }
    ann.centers.insert(ann.centers.end(), placed.begin(), placed.end());
  }
  if (reduced && stats) ++stats->frames_reduced;
  return ann;
}

std::vector<FrameAnnotation> generate_stream(const SceneProfile& profile, std::size_t n_frames,
                                             std::size_t width, std::size_t height, std::uint64_t seed,
                                             GenerateStats* stats) {
  profile.validate();
  if (width == 0 || height == 0) throw InvalidArgument("grid must be at least 1x1");
  const double short_side = static_cast<double>(std::min(width, height));
  for (const auto& c : profile.classes) {
    std::size_t most = 0;
    for (std::size_t i = 0; i < c.buckets.size(); ++i) {
      if (c.masses[i] > 0.0) most = std::max(most, c.buckets[i].hi);
    }
    if (most > 1 && c.min_sep >= short_side) {
      throw InvalidArgument(fmt::format("class '{}': min_sep {} does not fit a {}x{} grid", c.name, c.min_sep,
                                        width, height));
    }
  }
  std::vector<FrameAnnotation> stream;
  stream.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) stream.push_back(generate_frame(profile, i, width, height, seed, stats));
  return stream;
}

void write_annotations(std::ostream& out, const std::vector<FrameAnnotation>& stream,
                       const ClassCatalog& catalog) {
  for (const auto& ann : stream) {
    ordered_json centers = ordered_json::array();
    for (const auto& c : ann.centers) {
      ordered_json j;
      j["class"] = catalog.name(c.class_index);
      j["x"] = c.x;
      j["y"] = c.y;
      j["extent"] = c.extent;
      centers.push_back(std::move(j));
    }
    ordered_json line;
    line["frame_id"] = ann.frame_id;
    line["width"] = ann.width;
    line["height"] = ann.height;
    line["centers"] = std::move(centers);
    out << line.dump() << '\n';
  }
}

std::vector<FrameAnnotation> read_annotations(std::istream& in, const ClassCatalog& catalog) {
  std::vector<FrameAnnotation> stream;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      FrameAnnotation ann;
      ann.frame_id = j.at("frame_id").get<std::string>();
      ann.width = j.at("width").get<std::size_t>();
      ann.height = j.at("height").get<std::size_t>();
      for (const auto& c : j.at("centers")) {
        const auto name = c.at("class").get<std::string>();
        if (!catalog.contains(name)) throw DataError(fmt::format("unknown class '{}'", name));
        ann.centers.push_back({catalog.index_of(name), c.at("x").get<double>(), c.at("y").get<double>(),
                               c.at("extent").get<double>()});
      }
      validate_annotation(ann, catalog);
      stream.push_back(std::move(ann));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(fmt::format("line {}: {}", lineno, e.what()));
    } catch (const DataError& e) {
      throw DataError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  return stream;
}

void save_annotations(const std::string& path, const std::vector<FrameAnnotation>& stream,
                      const ClassCatalog& catalog) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path));
  write_annotations(out, stream, catalog);
}

std::vector<FrameAnnotation> load_annotations(const std::string& path, const ClassCatalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  try {
    return read_annotations(in, catalog);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path, e.what()));
  }
}

OracleAnswer oracle_answer(const std::vector<FrameAnnotation>& stream, const ClassCatalog& catalog,
                           const QuerySpec& query) {
  std::size_t begin = 0, end = stream.size();
  if (query.range) {
    begin = std::min(query.range->start, stream.size());
    end = std::min(query.range->end, stream.size());
  }
  auto tally = [&](const FrameAnnotation& ann, const std::string& cls) {
    const std::size_t k = catalog.index_of(cls);
    std::size_t n = 0;
    for (const auto& c : ann.centers) n += c.class_index == k ? 1 : 0;
    return n;
  };
  auto satisfied = [](std::size_t n, CompareOp op, std::size_t ct) {
    if (op == CompareOp::LessEqual) return n <= ct;
    if (op == CompareOp::GreaterEqual) return n >= ct;
    return n == ct;
  };

  OracleAnswer out;
  switch (query.kind) {
    case QueryKind::Retrieval:
    case QueryKind::Count: {
      std::size_t hits = 0;
      for (std::size_t i = begin; i < end; ++i) {
        bool all = true;
        for (const auto& cond : query.conditions) all = all && satisfied(tally(stream[i], cond.cls), cond.op, cond.ct);
        if (!all) continue;
        ++hits;
        out.frames.push_back(stream[i].frame_id);
      }
      out.value = static_cast<double>(hits);
      break;
    }
    case QueryKind::AggSum:
    case QueryKind::AggAvg: {
      double sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) sum += static_cast<double>(tally(stream[i], query.conditions.at(0).cls));
      out.value = sum;
      if (query.kind == QueryKind::AggAvg) out.value = end > begin ? sum / static_cast<double>(end - begin) : 0.0;
      break;
    }
  }
  return out;
}

}  // namespace pcq
