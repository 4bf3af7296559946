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
#include <variant>
#include <vector>

#include "pcq/heatmap.hpp"
#include "pcq/query.hpp"

namespace pcq {

/// Inclusive object-count range [lo, hi].
struct CountBucket {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool operator==(const CountBucket&) const = default;
};

enum class Placement { MinSeparation, Clustered };

struct ClassProfile {
  std::string name;
  std::vector<CountBucket> buckets;
  /// Relative frequency of each bucket; need not sum to 1.
  std::vector<double> masses;
  double extent_lo = 1.0;
  double extent_hi = 1.0;
  /// Minimum center distance between objects of this class, in cells.
  double min_sep = 1.0;
  Placement placement = Placement::MinSeparation;

  bool operator==(const ClassProfile&) const = default;
};

/// Per-class count distribution and geometry of a synthetic scene. Class
/// order defines the catalog.
struct SceneProfile {
  std::vector<ClassProfile> classes;

  ClassCatalog catalog() const;
  double max_extent() const;
  void validate() const;
  bool operator==(const SceneProfile&) const = default;
};

/// JSON object keyed by class, in catalog order:
///   {"car": {"buckets": [[0,0],[1,5],...], "masses": [...], "extent": [lo,hi],
///            "min_sep": 7, "placement": "min_sep" | "clustered"}}
/// "placement" is optional.
SceneProfile parse_profile(const std::string& json_text);
std::string profile_to_json(const SceneProfile& profile);
SceneProfile load_profile(const std::string& path);

struct GenerateStats {
  /// Objects dropped because no admissible position was found.
  std::size_t reduced_objects = 0;
  std::size_t frames_reduced = 0;
};

/// Seeded synthetic stream. Frame i draws from its own derived seed, so
/// frames are independent of each other and of generation order. Per class:
/// pick a bucket by mass, a count uniform in it, then place centers with up
/// to 200 attempts each; objects that cannot be placed are dropped and
/// counted in `stats`. Throws InvalidArgument when a class that can have
/// more than one object has min_sep >= the shorter grid side.
std::vector<FrameAnnotation> generate_stream(const SceneProfile& profile, std::size_t n_frames,
                                             std::size_t width, std::size_t height, std::uint64_t seed,
                                             GenerateStats* stats = nullptr);

FrameAnnotation generate_frame(const SceneProfile& profile, std::size_t index, std::size_t width,
                               std::size_t height, std::uint64_t seed, GenerateStats* stats = nullptr);

/// Annotation stream as JSON lines:
///   {"frame_id": ..., "width": W, "height": H,
///    "centers": [{"class": "car", "x": .., "y": .., "extent": ..}, ...]}
void write_annotations(std::ostream& out, const std::vector<FrameAnnotation>& stream,
                       const ClassCatalog& catalog);
std::vector<FrameAnnotation> read_annotations(std::istream& in, const ClassCatalog& catalog);
void save_annotations(const std::string& path, const std::vector<FrameAnnotation>& stream,
                      const ClassCatalog& catalog);
std::vector<FrameAnnotation> load_annotations(const std::string& path, const ClassCatalog& catalog);

/// Naive reference evaluator over raw annotations, kept independent of the
/// query engine for differential testing.
struct OracleAnswer {
  std::vector<std::string> frames;
  double value = 0.0;
};

OracleAnswer oracle_answer(const std::vector<FrameAnnotation>& stream, const ClassCatalog& catalog,
                           const QuerySpec& query);

}  // namespace pcq
