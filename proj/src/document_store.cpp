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

#include "pcq/document_store.hpp"

#include <charconv>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "pcq/error.hpp"
#include "pcq/rng.hpp"

namespace pcq {

using nlohmann::json;

std::size_t FrameDocument::count_of(std::string_view type) const {
  std::size_t n = 0;
  for (const auto& o : objects) {
    if (o.type == type) n += o.count;
  }
  return n;
}

std::string synthetic_timestamp(std::size_t index) {
  // 2024-04-07 15:43:02 UTC plus 0.8924030000 s.
  constexpr std::time_t kBase = 1712504582;
  constexpr std::uint64_t kBaseFraction = 8924030000ULL;  // 1e-10 s units
  constexpr std::uint64_t kTick = 5000000000ULL;
  const std::uint64_t frac = kBaseFraction + kTick * index;
  const std::time_t secs = kBase + static_cast<std::time_t>(frac / 10000000000ULL);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return fmt::format("{:04}-{:02}-{:02} {:02}:{:02}:{:02}.{:010}", tm.tm_year + 1900, tm.tm_mon + 1,
                     tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac % 10000000000ULL);
}

FrameDocument ingest_annotation(const FrameAnnotation& ann, const ClassCatalog& catalog,
                                const FrameMeta& meta) {
  validate_annotation(ann, catalog);
  FrameDocument doc{ann.frame_id, meta.timestamp, meta.vehicle_id, {}};
  std::vector<ObjectGroup> groups(catalog.size());
  for (const auto& c : ann.centers) {
    auto& g = groups[c.class_index];
    ++g.count;
    g.position.push_back({c.x, c.y});
  }
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    if (groups[k].count == 0) continue;
    groups[k].type = catalog.name(k);
    doc.objects.push_back(std::move(groups[k]));
  }
  return doc;
}

FrameDocument ingest_counts(std::string frame_id, const CountResult& result,
                            const ClassCatalog& catalog, const FrameMeta& meta) {
  if (result.peaks.size() != catalog.size()) {
    throw InvalidArgument(fmt::format("counter output has {} channels, catalog {}", result.peaks.size(),
                                      catalog.size()));
  }
  FrameDocument doc{std::move(frame_id), meta.timestamp, meta.vehicle_id, {}};
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    if (result.peaks[k].empty()) continue;
    ObjectGroup g{catalog.name(k), result.peaks[k].size(), {}};
    for (const auto& p : result.peaks[k]) {
      g.position.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    }
    doc.objects.push_back(std::move(g));
  }
  return doc;
}

std::string to_json_line(const FrameDocument& doc) {
  using ordered = nlohmann::ordered_json;
  ordered objects = ordered::array();
  for (const auto& o : doc.objects) {
    ordered pos = ordered::array();
    for (const auto& p : o.position) {
      ordered xy;
      xy["x"] = p.x;
      xy["y"] = p.y;
      pos.push_back(std::move(xy));
    }
    ordered entry;
    entry["type"] = o.type;
    entry["count"] = o.count;
    entry["position"] = std::move(pos);
    objects.push_back(std::move(entry));
  }
  ordered out;
  out["frame_id"] = doc.frame_id;
  out["timestamp"] = doc.timestamp;
  out["vehicle_id"] = doc.vehicle_id;
  out["objects"] = std::move(objects);
  return out.dump();
}

namespace {

std::size_t parse_count(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw DataError("negative object count");
    return static_cast<std::size_t>(v);
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw DataError(fmt::format("count '{}' is not a non-negative integer", s));
    }
    return v;
  }
  throw DataError("count must be an integer or a numeric string");
}

}  // namespace

FrameDocument from_json_line(std::string_view line) {
  try {
    const auto j = json::parse(line);
    FrameDocument doc;
    doc.frame_id = j.at("frame_id").get<std::string>();
    doc.timestamp = j.at("timestamp").get<std::string>();
    doc.vehicle_id = j.at("vehicle_id").get<std::string>();
    for (const auto& o : j.at("objects")) {
      ObjectGroup g;
      g.type = o.at("type").get<std::string>();
      g.count = parse_count(o.at("count"));
      if (o.contains("position")) {
        for (const auto& p : o.at("position")) {
          g.position.push_back({p.at("x").get<double>(), p.at("y").get<double>()});
        }
      }
      if (!g.position.empty() && g.position.size() != g.count) {
        throw DataError(fmt::format("'{}' count {} but {} positions", g.type, g.count, g.position.size()));
      }
      doc.objects.push_back(std::move(g));
    }
    return doc;
  } catch (const json::exception& e) {
    throw DataError(e.what());
  }
}

void write_corpus(std::ostream& out, const FrameCorpus& corpus) {
  for (const auto& doc : corpus) out << to_json_line(doc) << '\n';
}

FrameCorpus read_corpus(std::istream& in) {
  FrameCorpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      corpus.push_back(from_json_line(line));
    } catch (const DataError& e) {
      throw DataError(fmt::format("line {}: {}", lineno, e.what()));
    }
    if (!ids.insert(corpus.back().frame_id).second) {
      throw DataError(fmt::format("line {}: duplicate frame_id '{}'", lineno, corpus.back().frame_id));
    }
  }
  return corpus;
}

void save_corpus(const std::string& path, const FrameCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path));
  write_corpus(out, corpus);
  if (!out) throw DataError(fmt::format("write to '{}' failed", path));
}

FrameCorpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  try {
    return read_corpus(in);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path, e.what()));
  }
}

std::vector<FrameRange> consecutive_groups(std::size_t corpus_size, std::size_t n_groups,
                                           std::size_t len_min, std::size_t len_max,
                                           std::uint64_t seed) {
  if (len_min == 0 || len_min > len_max) {
    throw InvalidArgument(fmt::format("group lengths [{}, {}] invalid", len_min, len_max));
  }
  if (len_max > corpus_size) {
    throw InvalidArgument(fmt::format("group length {} exceeds corpus of {}", len_max, corpus_size));
  }
  SplitMix64 rng(seed);
  std::vector<FrameRange> groups;
  groups.reserve(n_groups);
  for (std::size_t i = 0; i < n_groups; ++i) {
    const auto len = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(len_min),
                                                          static_cast<std::int64_t>(len_max)));
    const auto start = static_cast<std::size_t>(rng.below(corpus_size - len + 1));
    groups.push_back({start, start + len});
  }
  return groups;
}

}  // namespace pcq
