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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pcq/heatmap.hpp"
#include "pcq/peaks.hpp"

namespace pcq {

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

struct ObjectGroup {
  std::string type;
  std::size_t count = 0;
  std::vector<Position> position;
  bool operator==(const ObjectGroup&) const = default;
};

/// One stored frame:
///
///   {"frame_id": "frame123", "timestamp": "2024-04-07 15:43:02.8924030000",
///    "vehicle_id": "vehicle_00000000",
///    "objects": [{"type": "car", "count": 10, "position": [{"x": 1.5, "y": 2.1}, ...]}, ...]}
///
/// Counts are written as numbers; the reader also accepts numeric strings.
struct FrameDocument {
  std::string frame_id;
  std::string timestamp;
  std::string vehicle_id;
  std::vector<ObjectGroup> objects;

  /// Count of `type` in this frame; 0 when absent.
  std::size_t count_of(std::string_view type) const;
  bool operator==(const FrameDocument&) const = default;
};

/// Frames in temporal order.
using FrameCorpus = std::vector<FrameDocument>;

struct FrameMeta {
  std::string timestamp;
  std::string vehicle_id = "vehicle_00000000";
};

/// "2024-04-07 15:43:02.8924030000" advanced by `index` half-second ticks.
std::string synthetic_timestamp(std::size_t index);

/// Ground-truth document; positions are the annotated centers.
FrameDocument ingest_annotation(const FrameAnnotation& ann, const ClassCatalog& catalog,
                                const FrameMeta& meta);

/// Predicted document from counter output; positions are the peak cells.
FrameDocument ingest_counts(std::string frame_id, const CountResult& result,
                            const ClassCatalog& catalog, const FrameMeta& meta);

std::string to_json_line(const FrameDocument& doc);
/// Throws DataError on malformed JSON or a schema violation.
FrameDocument from_json_line(std::string_view line);

void write_corpus(std::ostream& out, const FrameCorpus& corpus);
/// Blank lines are skipped; errors name the 1-based line number.
FrameCorpus read_corpus(std::istream& in);

void save_corpus(const std::string& path, const FrameCorpus& corpus);
FrameCorpus load_corpus(const std::string& path);

/// Half-open frame index range [start, end).
struct FrameRange {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - start; }
  bool operator==(const FrameRange&) const = default;
};

/// `n_groups` seeded ranges with length uniform in [len_min, len_max] and
/// start uniform over the admissible positions. Requires
/// 1 <= len_min <= len_max <= corpus_size.
std::vector<FrameRange> consecutive_groups(std::size_t corpus_size, std::size_t n_groups,
                                           std::size_t len_min, std::size_t len_max,
                                           std::uint64_t seed);

}  // namespace pcq
