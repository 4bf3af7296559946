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
#include <vector>

#include "pcq/document_store.hpp"
#include "pcq/heatmap.hpp"
#include "pcq/query.hpp"

namespace pcq {

/// Per-class absolute slack: floor(max_p count_c(p) * rate).
std::vector<std::size_t> tolerance_thresholds(const FrameCorpus& truth, const ClassCatalog& catalog,
                                              double rate);

struct RetrievalScore {
  double accuracy = 1.0;
  double precision = 1.0;
  double recall = 1.0;
  std::size_t true_pos = 0;
  std::size_t false_pos = 0;
  std::size_t false_neg = 0;
  std::size_t true_neg = 0;
};

/// A frame is correct when the predicted corpus selects it exactly when the
/// truth does, or when every conditioned class is within its tolerance of
/// the true count. Precision and recall compare the plain selected sets and
/// are 1.0 on an empty denominator. `thresholds` is indexed by catalog.
RetrievalScore eval_retrieval(const FrameCorpus& pred, const FrameCorpus& truth,
                              std::span<const QueryCondition> conditions, const ClassCatalog& catalog,
                              std::span<const std::size_t> thresholds);

/// |pred - truth| <= ceil(rate * truth).
bool count_answer_correct(std::size_t pred, std::size_t truth, double rate);

struct CountQueryScore {
  double accuracy = 1.0;
  std::size_t correct = 0;
  std::size_t total = 0;
};

/// Seeded random COUNT queries on one class: op uniform over {<=, >=, =},
/// ct uniform in [0, max true count], each over a random group (the whole
/// corpus when `groups` is empty).
CountQueryScore eval_count_queries(const FrameCorpus& pred, const FrameCorpus& truth, std::string_view cls,
                                   std::size_t n_queries, double rate, std::uint64_t seed,
                                   std::span<const FrameRange> groups = {});

/// Same with the class drawn uniformly from the catalog per query.
CountQueryScore eval_count_queries(const FrameCorpus& pred, const FrameCorpus& truth,
                                   const ClassCatalog& catalog, std::size_t n_queries, double rate,
                                   std::uint64_t seed, std::span<const FrameRange> groups = {});

/// max(p, t) / max(min(p, t), 1); 1 when both are 0.
double q_error(double pred, double truth);

struct AggScore {
  double mean_abs = 0.0;
  double mean_q_error = 1.0;
  std::size_t samples = 0;
};

/// SUM(cls) per group (whole corpus when `groups` is empty).
AggScore eval_agg(const FrameCorpus& pred, const FrameCorpus& truth, std::string_view cls,
                  std::span<const FrameRange> groups = {});

struct ClassReport {
  std::string name;
  double retrieval_accuracy = 1.0;
  double precision = 1.0;
  double recall = 1.0;
  double count_accuracy = 1.0;
  double agg_abs = 0.0;
  double agg_q_error = 1.0;
};

struct EvalReport {
  double tolerance = 0.1;
  std::size_t frames = 0;
  std::vector<ClassReport> classes;
  /// Unweighted mean over classes.
  ClassReport overall;
};

struct EvalOptions {
  double tolerance = 0.1;
  std::size_t retrieval_queries = 20;
  std::size_t count_queries = 1000;
  std::size_t groups = 500;
  std::size_t group_len_min = 100;
  std::size_t group_len_max = 500;
  std::uint64_t seed = 0;
};

/// Full protocol. Group lengths are capped at the corpus size.
EvalReport evaluate(const FrameCorpus& pred, const FrameCorpus& truth, const ClassCatalog& catalog,
                    const EvalOptions& options);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
/// Aligned text table, one row per class plus an overall row.
std::string report_table(const EvalReport& report);

}  // namespace pcq
