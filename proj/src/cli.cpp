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

#include "pcq/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pcq/document_store.hpp"
#include "pcq/error.hpp"
#include "pcq/evaluation.hpp"
#include "pcq/heatmap.hpp"
#include "pcq/model_selection.hpp"
#include "pcq/noise.hpp"
#include "pcq/parallel.hpp"
#include "pcq/partition.hpp"
#include "pcq/query.hpp"
#include "pcq/rng.hpp"
#include "pcq/synth.hpp"

namespace pcq::cli {

namespace {

struct CounterFlags {
  std::size_t pt = 4;
  double overlap = 0.2;
  std::optional<double> gamma;
  double max_extent = 6.0;
  std::string threshold_mode = "otsu";
  double fixed_t = 0.5;

  void add(CLI::App* app) {
    app->add_option("--pt", pt, "Number of partitions")->capture_default_str();
    app->add_option("--overlap", overlap, "Region expansion ratio")->capture_default_str();
    app->add_option("--gamma", gamma, "Duplicate merge radius in cells (default 2 x --max-extent)");
    app->add_option("--max-extent", max_extent, "Largest object extent in cells")->capture_default_str();
    app->add_option("--threshold-mode", threshold_mode, "otsu or fixed")
        ->check(CLI::IsMember({"otsu", "fixed"}))
        ->capture_default_str();
    app->add_option("--fixed-t", fixed_t, "Fixed peak threshold t")->capture_default_str();
  }

  CounterConfig config() const {
    CounterConfig c;
    c.partitions = pt;
    c.overlap_ratio = overlap;
    c.merge_radius = gamma ? *gamma : default_merge_radius(max_extent);
    c.threshold = {fixed_t, threshold_mode == "fixed" ? ThresholdMode::Fixed : ThresholdMode::DynamicOtsu};
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string profile_path;
  std::uint64_t seed = 0;

  ClassCatalog catalog() const {
    return profile_path.empty() ? ClassCatalog::nuscenes() : load_profile(profile_path).catalog();
  }
};

// Frame ids come from the annotation file when given, otherwise frame_NNNNNN.
std::vector<std::string> frame_ids(const std::string& ann_path, const ClassCatalog& catalog, std::size_t n) {
  std::vector<std::string> ids;
  if (!ann_path.empty()) {
    for (const auto& a : load_annotations(ann_path, catalog)) ids.push_back(a.frame_id);
    if (ids.size() != n) {
      throw DataError(fmt::format("{} annotations but {} heatmaps", ids.size(), n));
    }
    return ids;
  }
  for (std::size_t i = 0; i < n; ++i) ids.push_back(fmt::format("frame_{:06}", i));
  return ids;
}

void check_channels(const std::vector<Heatmap>& heatmaps, const ClassCatalog& catalog) {
  for (std::size_t i = 0; i < heatmaps.size(); ++i) {
    if (heatmaps[i].channels() != catalog.size()) {
      throw DataError(fmt::format("heatmap {} has {} channels, catalog has {} classes", i, heatmaps[i].channels(),
                                  catalog.size()));
    }
  }
}

std::vector<CounterConfig> parse_models(const std::string& text, const CounterFlags& base) {
  std::vector<CounterConfig> models;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    CounterFlags f = base;
    try {
      f.pt = std::stoul(item.substr(0, colon));
      if (colon != std::string::npos) f.overlap = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("model '{}' must look like pt[:overlap]", item));
    }
    models.push_back(f.config());
  }
  if (models.empty()) throw UsageError("--models lists no model");
  return models;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pcq: heatmap object counting and frame query engine", "pcq"};
  app.require_subcommand(1);
  Context ctx{out, err, {}, 0};
  app.add_option("--profile", ctx.profile_path, "Scene profile JSON; its class order is the catalog");
  app.add_option("--seed", ctx.seed, "Seed for every random choice")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic annotation stream");
  std::size_t n_frames = 100, width = 128, height = 128;
  std::string synth_out, synth_truth;
  synth->add_option("--frames", n_frames)->capture_default_str();
  synth->add_option("--width", width)->capture_default_str();
  synth->add_option("--height", height)->capture_default_str();
  synth->add_option("--out", synth_out, "Annotation JSONL")->required();
  synth->add_option("--truth", synth_truth, "Also write the ground-truth corpus");

  // render
  auto* render = app.add_subcommand("render", "Render target (optionally noisy) heatmaps");
  std::string render_in, render_out;
  NoiseProfile noise;
  double drop = 0.0, fp = 0.0;
  render->add_option("--in", render_in, "Annotation JSONL")->required();
  render->add_option("--out", render_out, "PCQH heatmap stream")->required();
  render->add_option("--blur", noise.blur_sigma, "Gaussian blur sigma");
  render->add_option("--noise", noise.additive_noise, "Additive noise amplitude");
  render->add_option("--drop", drop, "Per-object drop probability");
  render->add_option("--fp", fp, "Per-class spurious peak probability");
  render->add_option("--seam-bias", noise.boundary_split_bias, "Seam dip depth");
  render->add_option("--seam-pt", noise.seam_partitions, "Partition count defining the seams");

  // infer
  auto* infer = app.add_subcommand("infer", "Count objects in heatmaps and write a predicted corpus");
  std::string infer_in, infer_out, infer_ann;
  CounterFlags counter;
  counter.add(infer);
  infer->add_option("--in", infer_in, "PCQH heatmap stream")->required();
  infer->add_option("--out", infer_out, "Predicted corpus JSONL")->required();
  infer->add_option("--ann", infer_ann, "Annotation JSONL supplying frame ids");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert annotations to a ground-truth corpus");
  std::string ingest_in, ingest_out;
  ingest->add_option("--in", ingest_in, "Annotation JSONL")->required();
  ingest->add_option("--out", ingest_out, "Corpus JSONL")->required();

  // query
  auto* query = app.add_subcommand("query", "Run a RETRIEVAL / COUNT / AGG query");
  std::string query_text, query_corpus, query_range;
  query->add_option("query", query_text, "e.g. \"retrieve car>=3 pedestrian=0\"")->required();
  query->add_option("--corpus", query_corpus, "Corpus JSONL")->required();
  query->add_option("--range", query_range, "start:end frame range");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare a predicted corpus against ground truth");
  std::string eval_pred, eval_truth, eval_json;
  EvalOptions eval_opts;
  eval->add_option("--pred", eval_pred)->required();
  eval->add_option("--truth", eval_truth)->required();
  eval->add_option("--tolerance", eval_opts.tolerance)->capture_default_str();
  eval->add_option("--retrieval-queries", eval_opts.retrieval_queries)->capture_default_str();
  eval->add_option("--count-queries", eval_opts.count_queries)->capture_default_str();
  eval->add_option("--groups", eval_opts.groups)->capture_default_str();
  eval->add_option("--len-min", eval_opts.group_len_min)->capture_default_str();
  eval->add_option("--len-max", eval_opts.group_len_max)->capture_default_str();
  eval->add_option("--json", eval_json, "Also write the report as JSON");

  // select-model
  auto* select = app.add_subcommand("select-model", "Fit or apply per-frame model selection");
  select->require_subcommand(1);
  auto* fit = select->add_subcommand("fit", "Build a model-center registry from training frames");
  std::string fit_ann, fit_in, fit_out, fit_models = "1:0,4:0.2,9:0.2", fit_weights;
  double epsilon = kDefaultEpsilon;
  CounterFlags fit_counter;
  fit_counter.add(fit);
  fit->add_option("--ann", fit_ann, "Training annotations (truth)")->required();
  fit->add_option("--in", fit_in, "Training heatmaps (PCQH)")->required();
  fit->add_option("--models", fit_models, "Comma list of pt[:overlap]")->capture_default_str();
  fit->add_option("--epsilon", epsilon, "Chernoff deviation margin")->capture_default_str();
  fit->add_option("--class-weights", fit_weights, "Comma list of per-class descriptor weights");
  fit->add_option("--out", fit_out, "Registry JSON")->required();
  auto* apply = select->add_subcommand("apply", "Count each frame with its selected model");
  std::string apply_registry, apply_in, apply_out, apply_ann;
  apply->add_option("--registry", apply_registry)->required();
  apply->add_option("--in", apply_in, "PCQH heatmap stream")->required();
  apply->add_option("--out", apply_out, "Predicted corpus JSONL")->required();
  apply->add_option("--ann", apply_ann, "Annotation JSONL supplying frame ids");

  // report
  auto* report = app.add_subcommand("report", "Print a saved evaluation report as a table");
  std::string report_in;
  report->add_option("--in", report_in, "Report JSON from eval --json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      if (ctx.profile_path.empty()) throw UsageError("synth needs --profile");
      const auto profile = load_profile(ctx.profile_path);
      GenerateStats stats;
      std::vector<FrameAnnotation> stream;
      try {
        stream = generate_stream(profile, n_frames, width, height, ctx.seed, &stats);
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      const auto catalog = profile.catalog();
      save_annotations(synth_out, stream, catalog);
      if (!synth_truth.empty()) {
        FrameCorpus corpus;
        for (std::size_t i = 0; i < stream.size(); ++i) {
          corpus.push_back(ingest_annotation(stream[i], catalog, {synthetic_timestamp(i)}));
        }
        save_corpus(synth_truth, corpus);
      }
      if (stats.reduced_objects > 0) {
        err << fmt::format("warning: {} objects in {} frames could not be placed and were dropped\n",
                           stats.reduced_objects, stats.frames_reduced);
      }
    } else if (render->parsed()) {
      if (!(drop >= 0.0 && drop <= 1.0 && fp >= 0.0 && fp <= 1.0)) throw UsageError("--drop and --fp must lie in [0,1]");
      noise.drop_rate = {drop};
      noise.false_positive_rate = {fp};
      try {
        noise.validate();
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      const auto catalog = ctx.catalog();
      const auto stream = load_annotations(render_in, catalog);
      std::vector<Heatmap> heatmaps(stream.size());
      parallel_for(stream.size(), [&](std::size_t i) {
        auto hm = render_target_heatmap(stream[i], catalog);
        NoiseProfile p = noise;
        p.seed = derive_seed(ctx.seed, i);
        heatmaps[i] = simulate_prediction(hm, stream[i], p);
      });
      save_heatmaps(render_out, heatmaps);
    } else if (infer->parsed()) {
      const auto cfg = counter.config();
      const auto catalog = ctx.catalog();
      const auto heatmaps = load_heatmaps(infer_in);
      check_channels(heatmaps, catalog);
      const auto ids = frame_ids(infer_ann, catalog, heatmaps.size());
      FrameCorpus corpus(heatmaps.size());
      parallel_for(heatmaps.size(), [&](std::size_t i) {
        corpus[i] = ingest_counts(ids[i], infer_with_overlap(heatmaps[i], cfg), catalog, {synthetic_timestamp(i)});
      });
      save_corpus(infer_out, corpus);
    } else if (ingest->parsed()) {
      const auto catalog = ctx.catalog();
      const auto stream = load_annotations(ingest_in, catalog);
      FrameCorpus corpus;
      for (std::size_t i = 0; i < stream.size(); ++i) {
        corpus.push_back(ingest_annotation(stream[i], catalog, {synthetic_timestamp(i)}));
      }
      save_corpus(ingest_out, corpus);
    } else if (query->parsed()) {
      const auto catalog = ctx.catalog();
      auto spec = parse_query(query_text, &catalog);
      if (!query_range.empty()) spec.range = parse_range(query_range);
      const auto corpus = load_corpus(query_corpus);
      if (spec.range && spec.range->end > corpus.size()) {
        throw UsageError(fmt::format("range {} exceeds corpus of {}", query_range, corpus.size()));
      }
      out << format_answer(execute(corpus, spec));
    } else if (eval->parsed()) {
      if (!(eval_opts.tolerance >= 0.0 && eval_opts.tolerance < 1.0)) {
        throw UsageError("--tolerance must lie in [0,1)");
      }
      if (eval_opts.group_len_min == 0 || eval_opts.group_len_min > eval_opts.group_len_max) {
        throw UsageError("need 1 <= --len-min <= --len-max");
      }
      eval_opts.seed = ctx.seed;
      const auto catalog = ctx.catalog();
      const auto pred = load_corpus(eval_pred);
      const auto truth = load_corpus(eval_truth);
      EvalReport rep;
      try {
        rep = evaluate(pred, truth, catalog, eval_opts);
      } catch (const InvalidArgument& e) {
        throw DataError(e.what());
      }
      out << report_table(rep);
      if (!eval_json.empty()) {
        std::ofstream f(eval_json);
        if (!f) throw DataError(fmt::format("cannot open '{}' for writing", eval_json));
        f << report_to_json(rep);
      }
    } else if (fit->parsed()) {
      if (!(epsilon > 0.0)) throw UsageError("--epsilon must be > 0");
      const auto models = parse_models(fit_models, fit_counter);
      const auto catalog = ctx.catalog();
      const auto stream = load_annotations(fit_ann, catalog);
      const auto heatmaps = load_heatmaps(fit_in);
      check_channels(heatmaps, catalog);
      if (stream.size() != heatmaps.size()) {
        throw DataError(fmt::format("{} annotations but {} heatmaps", stream.size(), heatmaps.size()));
      }
      std::vector<double> weights;
      if (!fit_weights.empty()) {
        std::stringstream ss(fit_weights);
        std::string w;
        while (std::getline(ss, w, ',')) weights.push_back(std::stod(w));
        if (weights.size() != catalog.size()) throw UsageError("--class-weights needs one weight per class");
      }
      std::vector<std::vector<std::vector<std::size_t>>> predictions(stream.size());
      std::vector<std::vector<std::size_t>> truth(stream.size());
      std::vector<Descriptor> descriptors(stream.size());
      parallel_for(stream.size(), [&](std::size_t i) {
        truth[i] = annotation_counts(stream[i], catalog);
        for (const auto& m : models) predictions[i].push_back(infer_with_overlap(heatmaps[i], m).counts);
        descriptors[i] = describe_frame(heatmaps[i], weights);
      });
      ModelRegistry reg;
      reg.epsilon = epsilon;
      reg.class_weights = weights;
      reg.models = fit_model_centers(models, descriptors, assign_frames(predictions, truth, models.size()), epsilon);
      save_registry(fit_out, reg);
      for (std::size_t m = 0; m < reg.models.size(); ++m) {
        const auto& mc = reg.models[m];
        out << fmt::format("model {} pt={} overlap={}: n={} xi2={:.4f} P={:.4f}\n", m, mc.config.partitions,
                           mc.config.overlap_ratio, mc.n, mc.variance, mc.confidence);
      }
    } else if (apply->parsed()) {
      const auto reg = load_registry(apply_registry);
      const auto catalog = ctx.catalog();
      const auto heatmaps = load_heatmaps(apply_in);
      check_channels(heatmaps, catalog);
      const auto ids = frame_ids(apply_ann, catalog, heatmaps.size());
      FrameCorpus corpus(heatmaps.size());
      parallel_for(heatmaps.size(), [&](std::size_t i) {
        const auto& cfg = select_model(describe_frame(heatmaps[i], reg.class_weights), reg.models);
        corpus[i] = ingest_counts(ids[i], infer_with_overlap(heatmaps[i], cfg), catalog, {synthetic_timestamp(i)});
      });
      save_corpus(apply_out, corpus);
    } else if (report->parsed()) {
      std::ifstream f(report_in);
      if (!f) throw DataError(fmt::format("cannot open '{}'", report_in));
      std::stringstream ss;
      ss << f.rdbuf();
      out << report_table(report_from_json(ss.str()));
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace pcq::cli
