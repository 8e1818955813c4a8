#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trackforge/error.hpp"
#include "trackforge/io.hpp"
#include "trackforge/metrics.hpp"
#include "trackforge/online_tracker.hpp"
#include "trackforge/parallel.hpp"
#include "trackforge/refinement.hpp"
#include "trackforge/simulate.hpp"

namespace trackforge::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

RunConfig load_config(const std::string& path) {
  return path.empty() ? parse_config("{}") : read_config(path);
}

fs::path sidecar_for(const std::string& out, const std::string& explicit_path) {
  return explicit_path.empty() ? fs::path(out + ".emb") : fs::path(explicit_path);
}

void apply_thread_env() {
  if (const char* env = std::getenv("TRACKFORGE_THREADS")) {
    char* end = nullptr;
    const unsigned long n = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0') {
      throw Error(ErrorKind::Config, "TRACKFORGE_THREADS must be a non-negative integer");
    }
    set_thread_count(static_cast<unsigned>(n));
  } else {
    set_thread_count(1);
  }
}

std::string report_line(const MetricReport& r) {
  return "HOTA " + fixed4(r.hota) + "  IDSW " + std::to_string(r.idsw) + "  LocA " +
         fixed4(r.loc_a) + "  DetA " + fixed4(r.det_a) + "  AssA " + fixed4(r.ass_a) + "  FN " +
         std::to_string(r.fn) + "  FP " + std::to_string(r.fp);
}

nlohmann::json report_json(const MetricReport& r) {
  nlohmann::json j{{"hota", r.hota}, {"det_a", r.det_a}, {"ass_a", r.ass_a},
                   {"loc_a", r.loc_a}, {"idsw", r.idsw}, {"fp", r.fp},
                   {"fn", r.fn},       {"empty_scene", r.empty_scene}};
  auto& rows = j["per_alpha"] = nlohmann::json::array();
  for (const auto& a : r.per_alpha) {
    rows.push_back({{"alpha", a.alpha}, {"hota", a.hota}, {"det_a", a.det_a},
                    {"ass_a", a.ass_a}, {"loc_a", a.loc_a}, {"tp", a.tp},
                    {"fn", a.fn}, {"fp", a.fp}});
  }
  return j;
}

void print_per_alpha(const MetricReport& r, std::ostream& out) {
  out << "alpha   HOTA    DetA    AssA    LocA\n";
  for (const auto& a : r.per_alpha) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f    %.4f  %.4f  %.4f  %.4f\n", a.alpha, a.hota, a.det_a,
                  a.ass_a, a.loc_a);
    out << buf;
  }
}

struct TrackArgs {
  std::string dets, embs, config, out, out_embs;
};

int cmd_track(const TrackArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.config);
  const SequenceBundle bundle = load_sequence(a.dets, a.embs);
  const TrackSet tracks = run(bundle, cfg.tracker);
  write_tracks(tracks, a.out);
  write_track_embeddings(tracks, sidecar_for(a.out, a.out_embs));
  out << "tracks: " << tracks.tracklets.size() << " (" << tracks.record_count() << " records)\n";
  return kSuccess;
}

struct RefineArgs {
  std::string tracks, embs, config, out, out_embs;
  bool no_split = false;
};

int cmd_refine(const RefineArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(a.config);
  if (a.no_split) cfg.refine.enable_split = false;
  const TrackSet input = read_tracks(a.tracks, fs::path(a.embs));
  const RefineResult res = refine(input, cfg.refine);
  write_tracks(res.tracks, a.out);
  write_track_embeddings(res.tracks, sidecar_for(a.out, a.out_embs));
  out << "tracklets: " << res.input_count << " -> " << res.after_split << " -> "
      << res.after_connect << "\n";
  return kSuccess;
}

struct EvalArgs {
  std::vector<std::string> gt, pred;
  std::string config;
  bool per_alpha = false;
  bool json = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.gt.size() != a.pred.size()) {
    throw CLI::ValidationError("--gt and --pred must be given the same number of times");
  }
  const RunConfig cfg = load_config(a.config);
  std::vector<MetricReport> reports;
  for (std::size_t i = 0; i < a.gt.size(); ++i) {
    const GroundTruth gt = read_ground_truth(a.gt[i]);
    const TrackSet pred = read_tracks(a.pred[i]);
    reports.push_back(hota(gt, pred, cfg.metrics));
  }
  const bool multi = reports.size() > 1;
  if (a.json) {
    nlohmann::json doc;
    if (!multi) {
      doc = report_json(reports.front());
    } else {
      auto& seqs = doc["sequences"] = nlohmann::json::array();
      for (std::size_t i = 0; i < reports.size(); ++i) {
        auto j = report_json(reports[i]);
        j["gt"] = a.gt[i];
        j["pred"] = a.pred[i];
        seqs.push_back(std::move(j));
      }
      const MeanReport m = mean_of(reports);
      doc["mean"] = {{"hota", m.hota}, {"det_a", m.det_a}, {"ass_a", m.ass_a}, {"loc_a", m.loc_a},
                     {"idsw", m.idsw}, {"fp", m.fp},       {"fn", m.fn}};
    }
    out << doc.dump(2) << "\n";
    return kSuccess;
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (multi) out << a.pred[i] << ": ";
    out << report_line(reports[i]) << "\n";
    if (reports[i].empty_scene) out << "note: empty scene, scores follow the empty-scene convention\n";
    if (a.per_alpha) print_per_alpha(reports[i], out);
  }
  if (multi) {
    const MeanReport m = mean_of(reports);
    out << "mean: HOTA " << fixed4(m.hota) << "  IDSW " << fixed2(m.idsw) << "  LocA "
        << fixed4(m.loc_a) << "  DetA " << fixed4(m.det_a) << "  AssA " << fixed4(m.ass_a)
        << "  FN " << fixed2(m.fn) << "  FP " << fixed2(m.fp) << "\n";
  }
  return kSuccess;
}

struct GenArgs {
  std::string config, out_dir;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.config);
  const Scenario s = gen_scenario(cfg.scenario);
  write_scenario(s, a.out_dir);
  out << "generated " << s.ground_truth.boxes.size() << " ground-truth boxes, "
      << s.detections.size() << " detections in " << a.out_dir << "\n";
  return kSuccess;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidParameter:
      return kUsage;
    case ErrorKind::Internal:
      return kInternal;
    default:
      return kDataError;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"trackforge: motion-free multi-object tracking, refinement and evaluation"};
  app.require_subcommand(1);

  TrackArgs track;
  auto* track_cmd = app.add_subcommand("track", "Run the online tracker over a detection file");
  track_cmd->add_option("--dets", track.dets, "MOT detection file")->required();
  track_cmd->add_option("--embs", track.embs, "EMB1 embeddings, one row per detection line")->required();
  track_cmd->add_option("--config", track.config, "JSON run configuration");
  track_cmd->add_option("--out", track.out, "Output MOT track file")->required();
  track_cmd->add_option("--out-embs", track.out_embs,
                        "Feature history sidecar (default: <out>.emb)");

  RefineArgs refine_args;
  auto* refine_cmd = app.add_subcommand("refine", "Split and reconnect tracklets offline");
  refine_cmd->add_option("--tracks", refine_args.tracks, "MOT track file")->required();
  refine_cmd->add_option("--embs", refine_args.embs, "Feature history sidecar")->required();
  refine_cmd->add_option("--config", refine_args.config, "JSON run configuration");
  refine_cmd->add_option("--out", refine_args.out, "Output MOT track file")->required();
  refine_cmd->add_option("--out-embs", refine_args.out_embs,
                         "Refined feature history sidecar (default: <out>.emb)");
  refine_cmd->add_flag("--no-split", refine_args.no_split, "Skip the splitting stage");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth file (repeatable)")->required();
  eval_cmd->add_option("--pred", eval.pred, "Prediction file (repeatable)")->required();
  eval_cmd->add_option("--config", eval.config, "JSON run configuration (metrics section)");
  eval_cmd->add_flag("--per-alpha", eval.per_alpha, "Append the per-threshold breakdown");
  eval_cmd->add_flag("--json", eval.json, "Emit a JSON report");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scenario");
  gen_cmd->add_option("--config", gen.config, "JSON run configuration (scenario section)");
  gen_cmd->add_option("--out-dir", gen.out_dir, "Directory for gt.txt, det.txt, emb.bin")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return kUsage;
  }

  try {
    apply_thread_env();
    if (*track_cmd) return cmd_track(track, out);
    if (*refine_cmd) return cmd_refine(refine_args, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*gen_cmd) return cmd_gen(gen, out);
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const CLI::ValidationError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace trackforge::cli
