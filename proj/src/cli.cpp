#include "tubelink/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tubelink/config.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/evaluation.hpp"
#include "tubelink/io.hpp"
#include "tubelink/log.hpp"
#include "tubelink/pipeline.hpp"
#include "tubelink/scoring.hpp"
#include "tubelink/synthetic.hpp"

namespace tubelink::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

/// Flags shared by every subcommand that layer over the config file.
struct Overrides {
  std::string config;
  std::optional<double> lambda, alpha, tau, nms_iou, actionness, eta, grid_step;
  std::optional<double> t_sr, t_tr, t_sp, t_tp, appearance_weight, flow_weight;
  std::optional<int> delta, max_paths, threads;

  RunSettings resolve() const {
    RunSettings s = config.empty() ? RunSettings{} : load_config(config);
    if (lambda) s.linker.lambda = *lambda;
    if (alpha) s.linker.alpha = *alpha;
    if (tau) s.linker.area_divisor = *tau;
    if (nms_iou) s.linker.nms_iou = *nms_iou;
    if (actionness) s.linker.actionness_threshold = *actionness;
    if (delta) s.linker.min_length = *delta;
    if (max_paths) s.linker.max_paths = *max_paths;
    if (threads) s.threads = *threads;
    if (eta) s.eval.eta = *eta;
    if (grid_step) s.eval.grid_step = *grid_step;
    if (t_sr) s.eval.spatial_recall = *t_sr;
    if (t_tr) s.eval.temporal_recall = *t_tr;
    if (t_sp) s.eval.spatial_precision = *t_sp;
    if (t_tp) s.eval.temporal_precision = *t_tp;
    if (appearance_weight) s.appearance_weight = *appearance_weight;
    if (flow_weight) s.flow_weight = *flow_weight;
    s.validate();
    return s;
  }
};

void add_link_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "Flat key = value settings file")->check(CLI::ExistingFile);
  app->add_option("--lambda", o.lambda, "Pairwise overlap weight");
  app->add_option("--alpha", o.alpha, "Label-change penalty");
  app->add_option("--delta", o.delta, "Minimum tube length in frames");
  app->add_option("--tau", o.tau, "Area threshold divisor");
  app->add_option("--max-paths", o.max_paths, "Paths extracted per class");
  app->add_option("--nms-iou", o.nms_iou, "Per-class NMS overlap threshold");
  app->add_option("--actionness-threshold", o.actionness, "Minimum actionness when --flow is given");
  app->add_option("--threads", o.threads, "Worker threads");
}

void add_eval_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "Flat key = value settings file")->check(CLI::ExistingFile);
  app->add_option("--eta", o.eta, "Value of the pinned thresholds while sweeping");
  app->add_option("--grid-step", o.grid_step, "Sweep resolution");
  app->add_option("--t-sr", o.t_sr, "Spatial recall threshold");
  app->add_option("--t-tr", o.t_tr, "Temporal recall threshold");
  app->add_option("--t-sp", o.t_sp, "Spatial precision threshold");
  app->add_option("--t-tp", o.t_tp, "Temporal precision threshold");
}

std::string class_summary(const std::vector<std::vector<ActionTube>>& per_video,
                          std::span<const VideoProposals> videos) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (std::size_t i = 0; i < per_video.size(); ++i) {
    for (const auto& t : per_video[i]) {
      ++counts[videos[i].class_names[t.class_id]];
      ++total;
    }
  }
  std::ostringstream s;
  s << "tubes: " << total;
  if (!counts.empty()) {
    s << " (";
    bool first = true;
    for (const auto& [name, n] : counts) {
      s << (first ? "" : ", ") << name << "=" << n;
      first = false;
    }
    s << ")";
  }
  return s.str();
}

int cmd_link(const std::string& proposals, const std::string& flow, const std::string& out_path,
             const Overrides& o, std::ostream& out) {
  const RunSettings settings = o.resolve();
  auto videos = load_proposal_file(proposals);
  if (!flow.empty()) {
    if (videos.size() != 1) throw ValidationError("--flow needs a proposals file holding exactly one video");
    prune_video_by_actionness(videos.front(), load_flow_maps(flow), settings.linker.actionness_threshold);
  }
  const auto per_video = link_videos(videos, settings);

  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw ValidationError("cannot open '" + out_path + "' for writing");
  for (std::size_t i = 0; i < videos.size(); ++i) {
    write_tubes(file, per_video[i], ClassVocabulary(videos[i].class_names));
  }
  out << class_summary(per_video, videos) << '\n';
  return kSuccess;
}

int cmd_score(const std::string& proposals, const std::string& features, const std::string& model_path,
              const std::string& out_path, const Overrides& o, std::ostream& out) {
  const RunSettings settings = o.resolve();
  auto videos = load_proposal_file(proposals);
  const auto feats = load_features(features);
  const auto model = load_linear_model(model_path);
  std::set<std::string> known;
  std::size_t scored = 0;
  for (auto& v : videos) {
    score_video(v, feats, model, settings.appearance_weight, settings.flow_weight);
    known.insert(v.video_id);
    for (const auto& f : v.frames) scored += f.size();
  }
  for (const auto& [key, f] : feats) {
    if (!known.count(std::get<0>(key))) {
      throw ValidationError("feature record for unknown video '" + std::get<0>(key) + "'");
    }
  }
  save_proposals(out_path, videos);
  out << "scored " << scored << " proposals with " << model.class_count() << " classes\n";
  return kSuccess;
}

ordered_json report_json(const MatchReport& r, std::span<const ActionTube> dets,
                         std::span<const GroundTruthTube> gts, const EvalThresholds& th) {
  ordered_json j;
  j["true_positives"] = r.true_positives;
  j["false_positives"] = r.false_positives;
  j["false_negatives"] = r.false_negatives;
  j["recall"] = r.recall;
  j["precision"] = r.precision;
  j["f1"] = r.f1;
  j["assignments"] = ordered_json::array();
  for (const auto& a : r.assignments) {
    ordered_json e;
    e["video_id"] = dets[a.detection].video_id;
    e["detection"] = a.detection;
    e["ground_truth"] = gts[a.ground_truth].tube_id;
    e["iou"] = a.iou;
    e["spatial_recall"] = a.profile.spatial_recall;
    e["spatial_precision"] = a.profile.spatial_precision;
    e["temporal_recall"] = a.profile.temporal_recall;
    e["temporal_precision"] = a.profile.temporal_precision;
    e["accepted"] = accept(a, dets, gts, th);
    j["assignments"].push_back(std::move(e));
  }
  return j;
}

ordered_json counts_json(const MatchReport& r) {
  ordered_json j;
  j["true_positives"] = r.true_positives;
  j["false_positives"] = r.false_positives;
  j["false_negatives"] = r.false_negatives;
  j["recall"] = r.recall;
  j["precision"] = r.precision;
  j["f1"] = r.f1;
  return j;
}

struct EvalPaths {
  std::string tubes, gt, out, curves, confusion, proposals;
  std::vector<std::string> class_names;
};

int cmd_eval(const EvalPaths& p, const Overrides& o, std::ostream& out) {
  const RunSettings settings = o.resolve();
  const EvalThresholds& th = settings.eval;

  std::vector<std::string> closed = p.class_names;
  if (!p.proposals.empty()) {
    for (const auto& v : load_proposal_file(p.proposals)) {
      for (const auto& n : v.class_names) {
        if (std::find(closed.begin(), closed.end(), n) == closed.end()) closed.push_back(n);
      }
    }
  }
  // Read with an open vocabulary seeded by the known names so every offender
  // can be reported at once.
  ClassVocabulary vocab(closed, true);
  const auto gts = load_ground_truth(p.gt, vocab);
  const auto dets = load_tubes(p.tubes, vocab);
  if (!closed.empty() && vocab.size() > closed.size()) {
    std::string names;
    for (std::size_t i = closed.size(); i < vocab.size(); ++i) names += (names.empty() ? "" : ", ") + vocab.name(i);
    throw ValidationError("unknown class names: " + names);
  }

  const auto matching = match_tubes(dets, gts);
  const auto report = detection_metrics(dets, gts, matching, th);
  const auto integrated = integrated_scores(dets, gts, th.eta, th.grid_step);

  ordered_json j;
  j["thresholds"] = {{"t_sr", th.spatial_recall}, {"t_tr", th.temporal_recall}, {"t_sp", th.spatial_precision},
                     {"t_tp", th.temporal_precision}, {"eta", th.eta}, {"grid_step", th.grid_step}};
  j["detections"] = dets.size();
  j["ground_truths"] = gts.size();
  j["report"] = report_json(report, dets, gts, th);
  j["no_localisation"] = counts_json(no_localisation_metrics(dets, gts));
  j["integrated"] = {{"I_sr", integrated.spatial_recall}, {"I_sp", integrated.spatial_precision},
                     {"I_tr", integrated.temporal_recall}, {"I_tp", integrated.temporal_precision},
                     {"overall", integrated.overall}};
  j["per_class"] = ordered_json::array();
  for (const auto& b : per_class_metrics(dets, gts, th, vocab.size())) {
    j["per_class"].push_back({{"class", vocab.name(b.class_id)}, {"detections", b.detections},
                              {"ground_truths", b.ground_truths}, {"true_positives", b.true_positives},
                              {"recall", b.recall}, {"precision", b.precision}, {"f1", b.f1}});
  }
  ordered_json sweeps;
  std::ostringstream csv;
  csv << "axis,threshold,recall,precision,f1\n";
  csv << std::setprecision(17);
  for (auto axis : kSweepAxes) {
    ordered_json rows = ordered_json::array();
    for (const auto& r : metric_curve(dets, gts, axis, th.eta, th.grid_step)) {
      rows.push_back({{"threshold", r.threshold}, {"recall", r.recall}, {"precision", r.precision}, {"f1", r.f1}});
      csv << axis_name(axis) << ',' << std::setprecision(12) << r.threshold << std::setprecision(17) << ',' << r.recall << ',' << r.precision << ',' << r.f1 << '\n';
    }
    sweeps[axis_name(axis)] = std::move(rows);
  }
  j["sweeps"] = std::move(sweeps);

  if (!p.curves.empty()) {
    std::ofstream f(p.curves, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + p.curves + "' for writing");
    f << csv.str();
  }
  if (!p.confusion.empty()) {
    std::ofstream f(p.confusion, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + p.confusion + "' for writing");
    const auto m = confusion_matrix(dets, gts, vocab.size());
    f << "ground_truth\\detection";
    for (const auto& n : vocab.names()) f << ',' << n;
    f << '\n';
    for (std::size_t g = 0; g < m.size(); ++g) {
      f << vocab.name(g);
      for (auto n : m[g]) f << ',' << n;
      f << '\n';
    }
  }
  if (p.out.empty() || p.out == "-") {
    out << j.dump(2) << '\n';
  } else {
    std::ofstream f(p.out, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + p.out + "' for writing");
    f << j.dump(2) << '\n';
    out << std::setprecision(4) << "recall=" << report.recall << " precision=" << report.precision
        << " f1=" << report.f1 << " integrated=" << integrated.overall << '\n';
  }
  return kSuccess;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& out) {
  auto spec = load_scenario_spec(spec_path);
  if (seed) spec.seed = *seed;
  const auto scenario = generate_scenario(spec);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const auto proposals = dir / (spec.video_id + ".proposals.jsonl");
  const auto gt = dir / (spec.video_id + ".gt.jsonl");
  save_proposals(proposals, std::span(&scenario.video, 1));
  save_ground_truth(gt, scenario.ground_truth, ClassVocabulary(scenario.video.class_names));
  out << "wrote " << proposals.string() << " and " << gt.string() << " (" << scenario.ground_truth.size()
      << " planted tubes)\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Link scored per-frame region proposals into action tubes and evaluate them", "tubelink"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  Overrides o;

  std::string proposals, flow, out_path;
  auto* link = app.add_subcommand("link", "Link proposals into action tubes");
  link->add_option("proposals", proposals, "Proposals JSON-lines file")->required()->check(CLI::ExistingFile);
  link->add_option("-o,--out", out_path, "Output tubes JSON-lines file")->required();
  link->add_option("--flow", flow, "Flow magnitude maps for actionness pruning")->check(CLI::ExistingFile);
  add_link_flags(link, o);

  std::string features, model;
  auto* score = app.add_subcommand("score", "Score proposals with a linear model on fused features");
  score->add_option("proposals", proposals, "Proposals JSON-lines file")->required()->check(CLI::ExistingFile);
  score->add_option("--features", features, "Feature JSON-lines file")->required()->check(CLI::ExistingFile);
  score->add_option("--model", model, "Linear model JSON file")->required()->check(CLI::ExistingFile);
  score->add_option("-o,--out", out_path, "Output proposals file")->required();
  score->add_option("--config", o.config, "Flat key = value settings file")->check(CLI::ExistingFile);
  score->add_option("--appearance-weight", o.appearance_weight, "Scale of the appearance half");
  score->add_option("--flow-weight", o.flow_weight, "Scale of the flow half");

  EvalPaths ep;
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("tubes", ep.tubes, "Detected tubes JSON-lines file")->required()->check(CLI::ExistingFile);
    sub->add_option("--gt", ep.gt, "Ground-truth JSON-lines file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", ep.out, "JSON report path (default: stdout)");
    sub->add_option("--confusion", ep.confusion, "Confusion-matrix CSV path");
    sub->add_option("--proposals", ep.proposals, "Proposals file whose class names form the vocabulary")
        ->check(CLI::ExistingFile);
    sub->add_option("--class-names", ep.class_names, "Known class names")->delimiter(',');
    add_eval_flags(sub, o);
  };
  auto* eval = app.add_subcommand("eval", "Evaluate tubes against ground truth");
  add_eval(eval);
  eval->add_option("--curves", ep.curves, "Threshold-sweep CSV path");
  auto* curves = app.add_subcommand("curves", "eval, always writing the threshold-sweep CSV");
  add_eval(curves);
  curves->add_option("--curves", ep.curves, "Threshold-sweep CSV path")->capture_default_str();
  ep.curves.clear();

  std::string spec, out_dir;
  std::optional<std::uint64_t> seed;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario");
  gen->add_option("spec", spec, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  gen->add_option("-o,--out-dir", out_dir, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the scenario seed");

  std::vector<std::string> argv_store{"tubelink"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  log::set_level(quiet ? log::Level::quiet : verbose ? log::Level::info : log::Level::warn);
  try {
    if (*link) return cmd_link(proposals, flow, out_path, o, out);
    if (*score) return cmd_score(proposals, features, model, out_path, o, out);
    if (*eval) return cmd_eval(ep, o, out);
    if (*curves) {
      if (ep.curves.empty()) ep.curves = "curves.csv";
      return cmd_eval(ep, o, out);
    }
    if (*gen) return cmd_gen(spec, out_dir, seed, out);
  } catch (const ValidationError& e) {
    err << "tubelink: " << e.what() << '\n';
    return kValidationError;
  } catch (const fs::filesystem_error& e) {
    err << "tubelink: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "tubelink: internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace tubelink::cli
