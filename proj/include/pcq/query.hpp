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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pcq/document_store.hpp"
#include "pcq/heatmap.hpp"

namespace pcq {

enum class CompareOp { LessEqual, GreaterEqual, Equal };

std::string_view op_symbol(CompareOp op);

/// count(q) op ct for one frame.
struct QueryCondition {
  std::string cls;
  CompareOp op = CompareOp::GreaterEqual;
  std::size_t ct = 0;

  bool holds(std::size_t count) const;
  bool operator==(const QueryCondition&) const = default;
};

enum class QueryKind { Retrieval, Count, AggSum, AggAvg };

struct QuerySpec {
  QueryKind kind = QueryKind::Retrieval;
  /// Retrieval: any number (conjunction). Count: exactly one. Agg: exactly
  /// one, whose class is aggregated (op and ct ignored).
  std::vector<QueryCondition> conditions;
  std::optional<FrameRange> range;

  /// Throws UsageError when the arity does not match the kind.
  void validate() const;
  bool operator==(const QuerySpec&) const = default;
};

/// Frame ids (corpus order) satisfying every condition. An empty list
/// selects every frame.
std::vector<std::string> retrieval(const FrameCorpus& corpus, std::span<const QueryCondition> conditions,
                                   std::optional<FrameRange> range = std::nullopt);
std::vector<std::size_t> retrieval_indices(const FrameCorpus& corpus,
                                           std::span<const QueryCondition> conditions,
                                           std::optional<FrameRange> range = std::nullopt);

std::size_t count_query(const FrameCorpus& corpus, const QueryCondition& condition,
                        std::optional<FrameRange> range = std::nullopt);

std::size_t agg_sum(const FrameCorpus& corpus, std::string_view cls,
                    std::optional<FrameRange> range = std::nullopt);
/// Throws InvalidArgument over an empty frame set.
double agg_avg(const FrameCorpus& corpus, std::string_view cls,
               std::optional<FrameRange> range = std::nullopt);

/// Retrieval -> frame ids, Count / AggSum -> integer, AggAvg -> real.
using QueryAnswer = std::variant<std::vector<std::string>, std::size_t, double>;

QueryAnswer execute(const FrameCorpus& corpus, const QuerySpec& spec);

/// Parses the text form:
///
///   retrieve car>=3 ped=0      count car>=5      agg sum car      agg avg car
///
/// Operators: <=, >=, = (and the shorthands >n, <n for >=n+1, <=n-1).
/// Classes are checked against `catalog` when one is given, which also
/// resolves the short names ped, cone, const, moto and bicyc.
QuerySpec parse_query(std::string_view text, const ClassCatalog* catalog = nullptr);

/// "start:end" -> [start, end).
FrameRange parse_range(std::string_view text);

/// One frame id per line, or a single number.
std::string format_answer(const QueryAnswer& answer);

}  // namespace pcq
