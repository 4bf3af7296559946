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

#include "pcq/query.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "pcq/error.hpp"

namespace pcq {

std::string_view op_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::LessEqual: return "<=";
    case CompareOp::GreaterEqual: return ">=";
    case CompareOp::Equal: return "=";
  }
  return "?";
}

bool QueryCondition::holds(std::size_t count) const {
  switch (op) {
    case CompareOp::LessEqual: return count <= ct;
    case CompareOp::GreaterEqual: return count >= ct;
    case CompareOp::Equal: return count == ct;
  }
  return false;
}

void QuerySpec::validate() const {
  switch (kind) {
    case QueryKind::Retrieval: return;
    case QueryKind::Count:
      if (conditions.size() != 1) throw UsageError("COUNT takes exactly one condition");
      return;
    case QueryKind::AggSum:
    case QueryKind::AggAvg:
      if (conditions.size() != 1) throw UsageError("AGG takes exactly one class");
      return;
  }
}

namespace {

FrameRange resolve(const FrameCorpus& corpus, std::optional<FrameRange> range) {
  if (!range) return {0, corpus.size()};
  if (range->start > range->end || range->end > corpus.size()) {
    throw InvalidArgument(fmt::format("range {}:{} outside corpus of {}", range->start, range->end,
                                      corpus.size()));
  }
  return *range;
}

}  // namespace

std::vector<std::size_t> retrieval_indices(const FrameCorpus& corpus,
                                           std::span<const QueryCondition> conditions,
                                           std::optional<FrameRange> range) {
  const auto r = resolve(corpus, range);
  std::vector<std::size_t> out;
  for (std::size_t i = r.start; i < r.end; ++i) {
    bool ok = true;
    for (const auto& cond : conditions) {
      if (!cond.holds(corpus[i].count_of(cond.cls))) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(i);
  }
  return out;
}

std::vector<std::string> retrieval(const FrameCorpus& corpus, std::span<const QueryCondition> conditions,
                                   std::optional<FrameRange> range) {
  std::vector<std::string> ids;
  for (std::size_t i : retrieval_indices(corpus, conditions, range)) ids.push_back(corpus[i].frame_id);
  return ids;
}

std::size_t count_query(const FrameCorpus& corpus, const QueryCondition& condition,
                        std::optional<FrameRange> range) {
  const auto r = resolve(corpus, range);
  std::size_t n = 0;
  for (std::size_t i = r.start; i < r.end; ++i) {
    if (condition.holds(corpus[i].count_of(condition.cls))) ++n;
  }
  return n;
}

std::size_t agg_sum(const FrameCorpus& corpus, std::string_view cls, std::optional<FrameRange> range) {
  const auto r = resolve(corpus, range);
  std::size_t sum = 0;
  for (std::size_t i = r.start; i < r.end; ++i) sum += corpus[i].count_of(cls);
  return sum;
}

double agg_avg(const FrameCorpus& corpus, std::string_view cls, std::optional<FrameRange> range) {
  const auto r = resolve(corpus, range);
  if (r.size() == 0) throw InvalidArgument("AGG_AVG over an empty frame set");
  return static_cast<double>(agg_sum(corpus, cls, r)) / static_cast<double>(r.size());
}

QueryAnswer execute(const FrameCorpus& corpus, const QuerySpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case QueryKind::Retrieval: return retrieval(corpus, spec.conditions, spec.range);
    case QueryKind::Count: return count_query(corpus, spec.conditions.front(), spec.range);
    case QueryKind::AggSum: return agg_sum(corpus, spec.conditions.front().cls, spec.range);
    case QueryKind::AggAvg: return agg_avg(corpus, spec.conditions.front().cls, spec.range);
  }
  throw UsageError("unknown query kind");
}

namespace {

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

std::size_t parse_count_literal(std::string_view s, std::string_view context) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(fmt::format("'{}' in '{}' is not a non-negative integer", s, context));
  }
  return v;
}

// Short names used in result tables.
constexpr std::pair<std::string_view, std::string_view> kShortNames[] = {
    {"ped", "pedestrian"},    {"cone", "traffic_cone"}, {"const", "construction_vehicle"},
    {"moto", "motorcycle"},   {"bicyc", "bicycle"},
};

std::string resolve_class(std::string_view cls, const ClassCatalog* catalog) {
  if (cls.empty()) throw UsageError("missing class name");
  if (!catalog || catalog->contains(cls)) return std::string(cls);
  for (const auto& [short_name, full] : kShortNames) {
    if (cls == short_name && catalog->contains(full)) return std::string(full);
  }
  throw UsageError(fmt::format("unknown class '{}'", cls));
}

QueryCondition parse_condition(std::string_view word, const ClassCatalog* catalog) {
  const auto pos = word.find_first_of("<>=");
  if (pos == std::string_view::npos) {
    throw UsageError(fmt::format("condition '{}' needs one of <=, >=, =", word));
  }
  QueryCondition c;
  c.cls = resolve_class(word.substr(0, pos), catalog);
  std::string_view rest = word.substr(pos);
  if (rest.starts_with("<=")) {
    c.op = CompareOp::LessEqual;
    c.ct = parse_count_literal(rest.substr(2), word);
  } else if (rest.starts_with(">=")) {
    c.op = CompareOp::GreaterEqual;
    c.ct = parse_count_literal(rest.substr(2), word);
  } else if (rest.starts_with("=")) {
    c.op = CompareOp::Equal;
    c.ct = parse_count_literal(rest.substr(1), word);
  } else if (rest.starts_with(">")) {
    c.op = CompareOp::GreaterEqual;
    c.ct = parse_count_literal(rest.substr(1), word) + 1;
  } else {
    const auto n = parse_count_literal(rest.substr(1), word);
    if (n == 0) throw UsageError(fmt::format("'{}' can never hold", word));
    c.op = CompareOp::LessEqual;
    c.ct = n - 1;
  }
  return c;
}

}  // namespace

QuerySpec parse_query(std::string_view text, const ClassCatalog* catalog) {
  const auto words = split_words(text);
  if (words.empty()) throw UsageError("empty query");
  QuerySpec spec;
  if (words[0] == "retrieve") {
    spec.kind = QueryKind::Retrieval;
    for (std::size_t i = 1; i < words.size(); ++i) spec.conditions.push_back(parse_condition(words[i], catalog));
  } else if (words[0] == "count") {
    spec.kind = QueryKind::Count;
    if (words.size() != 2) throw UsageError("usage: count <class><op><n>");
    spec.conditions.push_back(parse_condition(words[1], catalog));
  } else if (words[0] == "agg") {
    if (words.size() != 3) throw UsageError("usage: agg sum|avg <class>");
    if (words[1] == "sum") {
      spec.kind = QueryKind::AggSum;
    } else if (words[1] == "avg") {
      spec.kind = QueryKind::AggAvg;
    } else {
      throw UsageError(fmt::format("unknown aggregate '{}'", words[1]));
    }
    spec.conditions.push_back({resolve_class(words[2], catalog), CompareOp::GreaterEqual, 0});
  } else {
    throw UsageError(fmt::format("unknown query verb '{}'", words[0]));
  }
  return spec;
}

FrameRange parse_range(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw UsageError(fmt::format("range '{}' must be start:end", text));
  FrameRange r{parse_count_literal(text.substr(0, colon), text),
               parse_count_literal(text.substr(colon + 1), text)};
  if (r.start > r.end) throw UsageError(fmt::format("range '{}' has start > end", text));
  return r;
}

std::string format_answer(const QueryAnswer& answer) {
  if (const auto* ids = std::get_if<std::vector<std::string>>(&answer)) {
    std::string out;
    for (const auto& id : *ids) {
      out += id;
      out += '\n';
    }
    return out;
  }
  if (const auto* n = std::get_if<std::size_t>(&answer)) return fmt::format("{}\n", *n);
  return fmt::format("{}\n", std::get<double>(answer));
}

}  // namespace pcq
