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

#include "pcq/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "pcq/error.hpp"
#include "pcq/rng.hpp"

namespace pcq {

namespace {

void check_aligned(const FrameCorpus& pred, const FrameCorpus& truth) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument(fmt::format("predicted corpus has {} frames, truth {}", pred.size(), truth.size()));
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].frame_id != truth[i].frame_id) {
      throw InvalidArgument(fmt::format("frame {} differs: '{}' vs '{}'", i, pred[i].frame_id, truth[i].frame_id));
    }
  }
}

std::size_t max_count(const FrameCorpus& corpus, std::string_view cls) {
  std::size_t m = 0;
  for (const auto& d : corpus) m = std::max(m, d.count_of(cls));
  return m;
}

std::size_t absdiff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

CompareOp random_op(SplitMix64& rng) {
  switch (rng.below(3)) {
    case 0: return CompareOp::LessEqual;
    case 1: return CompareOp::GreaterEqual;
    default: return CompareOp::Equal;
  }
}

}  // namespace

std::vector<std::size_t> tolerance_thresholds(const FrameCorpus& truth, const ClassCatalog& catalog,
                                              double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument(fmt::format("tolerance rate {} outside [0,1)", rate));
  std::vector<std::size_t> out(catalog.size());
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    // The small bias keeps products such as 0.29 * 100 from flooring to 28.
    out[c] = static_cast<std::size_t>(std::floor(static_cast<double>(max_count(truth, catalog.name(c))) * rate + 1e-9));
  }
  return out;
}

RetrievalScore eval_retrieval(const FrameCorpus& pred, const FrameCorpus& truth,
                              std::span<const QueryCondition> conditions, const ClassCatalog& catalog,
                              std::span<const std::size_t> thresholds) {
  check_aligned(pred, truth);
  if (thresholds.size() != catalog.size()) throw InvalidArgument("one tolerance threshold per class required");
  std::vector<std::size_t> cond_class;
  for (const auto& c : conditions) cond_class.push_back(catalog.index_of(c.cls));

  RetrievalScore s;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bool p_sat = true, t_sat = true, within = true;
    for (std::size_t j = 0; j < conditions.size(); ++j) {
      const auto& cond = conditions[j];
      const auto pc = pred[i].count_of(cond.cls);
      const auto tc = truth[i].count_of(cond.cls);
      p_sat = p_sat && cond.holds(pc);
      t_sat = t_sat && cond.holds(tc);
      within = within && absdiff(pc, tc) <= thresholds[cond_class[j]];
    }
    if (p_sat == t_sat || within) ++correct;
    if (p_sat && t_sat) ++s.true_pos;
    if (p_sat && !t_sat) ++s.false_pos;
    if (!p_sat && t_sat) ++s.false_neg;
    if (!p_sat && !t_sat) ++s.true_neg;
  }
  if (!truth.empty()) s.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  if (s.true_pos + s.false_pos > 0) {
    s.precision = static_cast<double>(s.true_pos) / static_cast<double>(s.true_pos + s.false_pos);
  }
  if (s.true_pos + s.false_neg > 0) {
    s.recall = static_cast<double>(s.true_pos) / static_cast<double>(s.true_pos + s.false_neg);
  }
  return s;
}

bool count_answer_correct(std::size_t pred, std::size_t truth, double rate) {
  const auto slack = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(truth) - 1e-9));
  return absdiff(pred, truth) <= slack;
}

namespace {

CountQueryScore run_count_queries(const FrameCorpus& pred, const FrameCorpus& truth,
                                  std::span<const std::string> classes, std::size_t n_queries, double rate,
                                  std::uint64_t seed, std::span<const FrameRange> groups) {
  check_aligned(pred, truth);
  std::vector<std::size_t> maxima;
  for (const auto& cls : classes) maxima.push_back(max_count(truth, cls));
  SplitMix64 rng(seed);
  CountQueryScore s;
  for (std::size_t q = 0; q < n_queries; ++q) {
    const auto k = classes.size() == 1 ? 0 : static_cast<std::size_t>(rng.below(classes.size()));
    QueryCondition cond;
    cond.cls = classes[k];
    cond.op = random_op(rng);
    cond.ct = static_cast<std::size_t>(rng.below(maxima[k] + 1));
    std::optional<FrameRange> range;
    if (!groups.empty()) range = groups[static_cast<std::size_t>(rng.below(groups.size()))];
    const auto p = count_query(pred, cond, range);
    const auto t = count_query(truth, cond, range);
    if (count_answer_correct(p, t, rate)) ++s.correct;
    ++s.total;
  }
  if (s.total > 0) s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.total);
  return s;
}

}  // namespace

CountQueryScore eval_count_queries(const FrameCorpus& pred, const FrameCorpus& truth, std::string_view cls,
                                   std::size_t n_queries, double rate, std::uint64_t seed,
                                   std::span<const FrameRange> groups) {
  const std::string c(cls);
  return run_count_queries(pred, truth, std::span<const std::string>(&c, 1), n_queries, rate, seed, groups);
}

CountQueryScore eval_count_queries(const FrameCorpus& pred, const FrameCorpus& truth,
                                   const ClassCatalog& catalog, std::size_t n_queries, double rate,
                                   std::uint64_t seed, std::span<const FrameRange> groups) {
  return run_count_queries(pred, truth, catalog.names(), n_queries, rate, seed, groups);
}

double q_error(double pred, double truth) {
  if (pred == truth) return 1.0;
  return std::max(pred, truth) / std::max(std::min(pred, truth), 1.0);
}

AggScore eval_agg(const FrameCorpus& pred, const FrameCorpus& truth, std::string_view cls,
                  std::span<const FrameRange> groups) {
  check_aligned(pred, truth);
  std::vector<FrameRange> ranges(groups.begin(), groups.end());
  if (ranges.empty()) ranges.push_back({0, truth.size()});
  AggScore s;
  double abs_sum = 0.0, q_sum = 0.0;
  for (const auto& r : ranges) {
    const auto p = static_cast<double>(agg_sum(pred, cls, r));
    const auto t = static_cast<double>(agg_sum(truth, cls, r));
    abs_sum += std::abs(p - t);
    q_sum += q_error(p, t);
  }
  s.samples = ranges.size();
  s.mean_abs = abs_sum / static_cast<double>(s.samples);
  s.mean_q_error = q_sum / static_cast<double>(s.samples);
  return s;
}

EvalReport evaluate(const FrameCorpus& pred, const FrameCorpus& truth, const ClassCatalog& catalog,
                    const EvalOptions& options) {
  check_aligned(pred, truth);
  if (truth.empty()) throw InvalidArgument("cannot evaluate an empty corpus");
  EvalReport report;
  report.tolerance = options.tolerance;
  report.frames = truth.size();
  const auto thresholds = tolerance_thresholds(truth, catalog, options.tolerance);

  const std::size_t len_max = std::min(options.group_len_max, truth.size());
  const std::size_t len_min = std::min(options.group_len_min, len_max);
  const auto groups = consecutive_groups(truth.size(), options.groups, std::max<std::size_t>(len_min, 1),
                                         len_max, derive_seed(options.seed, 0));

  for (std::size_t c = 0; c < catalog.size(); ++c) {
    const auto& name = catalog.name(c);
    ClassReport row;
    row.name = name;

    SplitMix64 rng(derive_seed(options.seed, 1 + 3 * c));
    const auto max_c = max_count(truth, name);
    double acc = 0.0, prec = 0.0, rec = 0.0;
    for (std::size_t q = 0; q < options.retrieval_queries; ++q) {
      QueryCondition cond{name, random_op(rng), static_cast<std::size_t>(rng.below(max_c + 1))};
      const auto s = eval_retrieval(pred, truth, std::span(&cond, 1), catalog, thresholds);
      acc += s.accuracy;
      prec += s.precision;
      rec += s.recall;
    }
    if (options.retrieval_queries > 0) {
      const auto n = static_cast<double>(options.retrieval_queries);
      row.retrieval_accuracy = acc / n;
      row.precision = prec / n;
      row.recall = rec / n;
    }
    row.count_accuracy = eval_count_queries(pred, truth, name, options.count_queries, options.tolerance,
                                            derive_seed(options.seed, 2 + 3 * c), groups)
                             .accuracy;
    const auto agg = eval_agg(pred, truth, name, groups);
    row.agg_abs = agg.mean_abs;
    row.agg_q_error = agg.mean_q_error;
    report.classes.push_back(row);
  }

  auto& o = report.overall;
  o.name = "overall";
  o.retrieval_accuracy = o.precision = o.recall = o.count_accuracy = o.agg_abs = o.agg_q_error = 0.0;
  for (const auto& r : report.classes) {
    o.retrieval_accuracy += r.retrieval_accuracy;
    o.precision += r.precision;
    o.recall += r.recall;
    o.count_accuracy += r.count_accuracy;
    o.agg_abs += r.agg_abs;
    o.agg_q_error += r.agg_q_error;
  }
  const auto k = static_cast<double>(report.classes.size());
  o.retrieval_accuracy /= k;
  o.precision /= k;
  o.recall /= k;
  o.count_accuracy /= k;
  o.agg_abs /= k;
  o.agg_q_error /= k;
  return report;
}

namespace {

nlohmann::ordered_json row_json(const ClassReport& r) {
  nlohmann::ordered_json j;
  j["class"] = r.name;
  j["retrieval_accuracy"] = r.retrieval_accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["count_accuracy"] = r.count_accuracy;
  j["agg_abs"] = r.agg_abs;
  j["agg_q_error"] = r.agg_q_error;
  return j;
}

ClassReport row_from(const nlohmann::json& j) {
  ClassReport r;
  r.name = j.at("class").get<std::string>();
  r.retrieval_accuracy = j.at("retrieval_accuracy").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.count_accuracy = j.at("count_accuracy").get<double>();
  r.agg_abs = j.at("agg_abs").get<double>();
  r.agg_q_error = j.at("agg_q_error").get<double>();
  return r;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["tolerance"] = report.tolerance;
  j["frames"] = report.frames;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.classes) rows.push_back(row_json(r));
  j["classes"] = std::move(rows);
  j["overall"] = row_json(report.overall);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.tolerance = j.at("tolerance").get<double>();
    r.frames = j.at("frames").get<std::size_t>();
    for (const auto& row : j.at("classes")) r.classes.push_back(row_from(row));
    r.overall = row_from(j.at("overall"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("malformed evaluation report: {}", e.what()));
  }
}

std::string report_table(const EvalReport& report) {
  std::size_t name_w = 7;
  for (const auto& r : report.classes) name_w = std::max(name_w, r.name.size());
  const auto pct = static_cast<int>(std::lround(report.tolerance * 100.0));
  std::string out = fmt::format("{:<{}}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}\n", "class", name_w,
                                fmt::format("RET@{}%", pct), "precision", "recall", fmt::format("COUNT@{}%", pct),
                                "AGG(abs)", "AGG(q)");
  auto line = [&](const ClassReport& r) {
    out += fmt::format("{:<{}}  {:>9.3f}  {:>9.3f}  {:>9.3f}  {:>9.3f}  {:>9.3f}  {:>9.3f}\n", r.name, name_w,
                       r.retrieval_accuracy, r.precision, r.recall, r.count_accuracy, r.agg_abs, r.agg_q_error);
  };
  for (const auto& r : report.classes) line(r);
  out += std::string(name_w + 6 * 11, '-') + "\n";
  line(report.overall);
  return out;
}

}  // namespace pcq
