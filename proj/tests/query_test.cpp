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

#include <gtest/gtest.h>

#include <algorithm>
#include <iterator>

#include "pcq/error.hpp"
#include "pcq/query.hpp"
#include "test_util.hpp"

namespace pcq {
namespace {

FrameCorpus corpus_with(const std::string& cls, const std::vector<std::size_t>& counts) {
  FrameCorpus corpus;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    FrameDocument d{"f" + std::to_string(i + 1), "t", "v", {}};
    if (counts[i] > 0) d.objects.push_back({cls, counts[i], {}});
    corpus.push_back(d);
  }
  return corpus;
}

FrameCorpus random_corpus(SplitMix64& rng, std::size_t n, const std::vector<std::string>& classes) {
  FrameCorpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    FrameDocument d{"frame_" + std::to_string(i), "t", "v", {}};
    for (const auto& c : classes) {
      const auto k = rng.below(3) == 0 ? 0 : rng.below(8);
      if (k > 0) d.objects.push_back({c, k, {}});
    }
    corpus.push_back(d);
  }
  return corpus;
}

// Naive scan with its own count lookup and comparison.
std::vector<std::string> scan(const FrameCorpus& corpus, const std::vector<QueryCondition>& conds) {
  std::vector<std::string> out;
  for (const auto& d : corpus) {
    bool all = true;
    for (const auto& c : conds) {
      std::size_t n = 0;
      for (const auto& o : d.objects) {
        if (o.type == c.cls) n += o.count;
      }
      const bool ok = c.op == CompareOp::LessEqual ? n <= c.ct : c.op == CompareOp::GreaterEqual ? n >= c.ct : n == c.ct;
      all = all && ok;
    }
    if (all) out.push_back(d.frame_id);
  }
  return out;
}

QueryCondition random_condition(SplitMix64& rng, const std::vector<std::string>& classes) {
  return {classes[rng.below(classes.size())], static_cast<CompareOp>(rng.below(3)), rng.below(9)};
}

TEST(RetrievalTest, EmptyConditionsSelectAll) {
  const auto corpus = corpus_with("car", {1, 0, 4});
  EXPECT_EQ(retrieval(corpus, {}), (std::vector<std::string>{"f1", "f2", "f3"}));
}

TEST(RetrievalTest, SingleCondition) {
  const auto corpus = corpus_with("car", {1, 2, 3, 4, 5});
  const std::vector<QueryCondition> c{{"car", CompareOp::GreaterEqual, 3}};
  EXPECT_EQ(retrieval(corpus, c), (std::vector<std::string>{"f3", "f4", "f5"}));
}

TEST(RetrievalTest, ConjunctionIsIntersection) {
  FrameCorpus corpus = corpus_with("car", {0, 2, 3, 2, 5});
  corpus[1].objects.push_back({"pedestrian", 1, {}});
  corpus[4].objects.push_back({"pedestrian", 2, {}});
  const QueryCondition a{"car", CompareOp::GreaterEqual, 2}, b{"pedestrian", CompareOp::Equal, 0};
  const std::vector<QueryCondition> both{a, b};
  EXPECT_EQ(retrieval(corpus, both), (std::vector<std::string>{"f3", "f4"}));

  SplitMix64 rng(1);
  const std::vector<std::string> classes{"car", "pedestrian", "bus"};
  for (int trial = 0; trial < 200; ++trial) {
    const auto corpus2 = random_corpus(rng, 30, classes);
    std::vector<QueryCondition> left, right;
    for (std::size_t i = 0; i < 1 + rng.below(3); ++i) left.push_back(random_condition(rng, classes));
    for (std::size_t i = 0; i < 1 + rng.below(3); ++i) right.push_back(random_condition(rng, classes));
    auto joined = left;
    joined.insert(joined.end(), right.begin(), right.end());
    const auto l = retrieval_indices(corpus2, left), r = retrieval_indices(corpus2, right);
    std::vector<std::size_t> inter;
    std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(inter));
    EXPECT_EQ(retrieval_indices(corpus2, joined), inter);
  }
}

TEST(RetrievalTest, MatchesNaiveScan) {
  SplitMix64 rng(2);
  const std::vector<std::string> classes{"car", "pedestrian", "bus", "truck"};
  for (int trial = 0; trial < 300; ++trial) {
    const auto corpus = random_corpus(rng, 1 + rng.below(50), classes);
    std::vector<QueryCondition> conds;
    for (std::size_t i = 0; i < rng.below(4); ++i) conds.push_back(random_condition(rng, classes));
    EXPECT_EQ(retrieval(corpus, conds), scan(corpus, conds));
  }
}

TEST(CountQueryTest, Examples) {
  const auto corpus = corpus_with("car", {2, 2, 5});
  EXPECT_EQ(count_query(corpus, {"car", CompareOp::Equal, 2}), 2u);
  EXPECT_EQ(count_query(corpus, {"car", CompareOp::GreaterEqual, 0}), 3u);
  EXPECT_EQ(count_query(corpus, {"car", CompareOp::GreaterEqual, 6}), 0u);
  EXPECT_EQ(count_query(corpus, {"bus", CompareOp::Equal, 0}), 3u);
}

TEST(CountQueryTest, Properties) {
  SplitMix64 rng(3);
  const std::vector<std::string> classes{"car", "pedestrian"};
  for (int trial = 0; trial < 300; ++trial) {
    const auto corpus = random_corpus(rng, 1 + rng.below(40), classes);
    const auto c = random_condition(rng, classes);
    const std::vector<QueryCondition> one{c};
    EXPECT_EQ(count_query(corpus, c), retrieval(corpus, one).size());
    EXPECT_EQ(count_query(corpus, {c.cls, CompareOp::LessEqual, c.ct}) +
                  count_query(corpus, {c.cls, CompareOp::GreaterEqual, c.ct + 1}),
              corpus.size());
  }
}

TEST(AggTest, Examples) {
  const auto corpus = corpus_with("car", {2, 3, 5});
  EXPECT_EQ(agg_sum(corpus, "car"), 10u);
  EXPECT_DOUBLE_EQ(agg_avg(corpus, "car"), 10.0 / 3.0);
  EXPECT_EQ(agg_sum(corpus, "bus"), 0u);
  EXPECT_EQ(agg_avg(corpus, "bus"), 0.0);
  const auto single = corpus_with("car", {7});
  EXPECT_EQ(agg_sum(single, "car"), 7u);
  EXPECT_EQ(agg_avg(single, "car"), 7.0);
  EXPECT_THROW(agg_avg(FrameCorpus{}, "car"), InvalidArgument);
  EXPECT_THROW(agg_avg(corpus, "car", FrameRange{1, 1}), InvalidArgument);
}

TEST(AggTest, SumIsAdditiveOverRanges) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto corpus = random_corpus(rng, 2 + rng.below(60), {"car"});
    const std::size_t cut = rng.below(corpus.size() + 1);
    EXPECT_EQ(agg_sum(corpus, "car", FrameRange{0, cut}) + agg_sum(corpus, "car", FrameRange{cut, corpus.size()}),
              agg_sum(corpus, "car"));
  }
}

TEST(RangeTest, RestrictsFrames) {
  const auto corpus = corpus_with("car", {1, 2, 3, 4, 5});
  const std::vector<QueryCondition> c{{"car", CompareOp::GreaterEqual, 2}};
  EXPECT_EQ(retrieval(corpus, c, FrameRange{0, 3}), (std::vector<std::string>{"f2", "f3"}));
  EXPECT_EQ(agg_sum(corpus, "car", FrameRange{3, 5}), 9u);
  EXPECT_THROW(retrieval(corpus, c, FrameRange{2, 9}), InvalidArgument);
  EXPECT_THROW(retrieval(corpus, c, FrameRange{3, 2}), InvalidArgument);
}

TEST(ParseQueryTest, Grammar) {
  const auto cat = ClassCatalog::nuscenes();
  const auto r = parse_query("retrieve car>=3 ped=0", &cat);
  EXPECT_EQ(r.kind, QueryKind::Retrieval);
  EXPECT_EQ(r.conditions, (std::vector<QueryCondition>{{"car", CompareOp::GreaterEqual, 3},
                                                      {"pedestrian", CompareOp::Equal, 0}}));
  const auto c = parse_query("count car>=5");
  EXPECT_EQ(c.kind, QueryKind::Count);
  EXPECT_EQ(c.conditions, (std::vector<QueryCondition>{{"car", CompareOp::GreaterEqual, 5}}));
  EXPECT_EQ(parse_query("agg sum car").kind, QueryKind::AggSum);
  EXPECT_EQ(parse_query("  agg   avg  bus ").kind, QueryKind::AggAvg);
  EXPECT_EQ(parse_query("retrieve car>5 ped<1", &cat).conditions,
            (std::vector<QueryCondition>{{"car", CompareOp::GreaterEqual, 6}, {"pedestrian", CompareOp::LessEqual, 0}}));
  EXPECT_EQ(parse_query("retrieve car<=2").conditions[0].op, CompareOp::LessEqual);
}

TEST(ParseQueryTest, Errors) {
  const auto cat = ClassCatalog::nuscenes();
  EXPECT_THROW(parse_query(""), UsageError);
  EXPECT_THROW(parse_query("select car"), UsageError);
  EXPECT_THROW(parse_query("count car>=1 bus=2"), UsageError);
  EXPECT_THROW(parse_query("count car"), UsageError);
  EXPECT_THROW(parse_query("count car>=x"), UsageError);
  EXPECT_THROW(parse_query("count car>=-1"), UsageError);
  EXPECT_THROW(parse_query("agg median car"), UsageError);
  EXPECT_THROW(parse_query("retrieve tram>=1", &cat), UsageError);
  EXPECT_THROW(parse_query("retrieve car<0"), UsageError);
}

TEST(ParseRangeTest, Basics) {
  EXPECT_EQ(parse_range("3:10"), (FrameRange{3, 10}));
  EXPECT_THROW(parse_range("10:3"), UsageError);
  EXPECT_THROW(parse_range("3"), UsageError);
  EXPECT_THROW(parse_range("a:b"), UsageError);
}

TEST(ExecuteTest, DispatchAndFormat) {
  const auto corpus = corpus_with("car", {2, 3, 5});
  EXPECT_EQ(format_answer(execute(corpus, parse_query("agg sum car"))), "10\n");
  EXPECT_EQ(format_answer(execute(corpus, parse_query("count car>=3"))), "2\n");
  EXPECT_EQ(format_answer(execute(corpus, parse_query("retrieve car=5"))), "f3\n");
  EXPECT_EQ(format_answer(execute(corpus, parse_query("retrieve car=9"))), "");
  auto spec = parse_query("agg avg car");
  spec.range = FrameRange{1, 3};
  EXPECT_EQ(std::get<double>(execute(corpus, spec)), 4.0);
  QuerySpec bad{QueryKind::Count, {}, std::nullopt};
  EXPECT_THROW(execute(corpus, bad), UsageError);
}

}  // namespace
}  // namespace pcq
