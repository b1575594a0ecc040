#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>

#include "eventvo/config.hpp"
#include "eventvo/error.hpp"
#include "eventvo/evaluation.hpp"
#include "eventvo/event_io.hpp"
#include "eventvo/frame_builder.hpp"
#include "eventvo/frontend.hpp"
#include "eventvo/lifetime.hpp"
#include "eventvo/synthetic.hpp"
#include "eventvo/vo_pipeline.hpp"

namespace eventvo::cli {

namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string config;
  std::string events;
  std::string tracks;
  std::string ground_truth;
  std::string out;
  std::string mode = "rigid+scale";
  std::optional<std::uint64_t> seed;
  std::optional<int> keyframe_period;
  std::optional<double> frame_interval;
  bool deterministic = false;
};

struct SynthArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> keyframe_period;
  std::optional<double> frame_interval;
};

struct EvalArgs {
  std::string estimate;
  std::string ground_truth;
  std::string mode = "rigid+scale";
  std::string out;
};

struct StatsArgs {
  std::string tracks;
  int min_lifetime = 3;
  std::optional<int> max_birth;
};

std::uint64_t fnv1a(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 1099511628211ULL;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cli", "cannot write " + path.string());
  out << text;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  if (a.events.empty() == a.tracks.empty()) {
    err << "error [cli] exactly one of --events or --tracks is required\n";
    return kExitInput;
  }
  Config config = load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.keyframe_period) config.keyframe_period = *a.keyframe_period;
  if (a.frame_interval) config.frame_interval = *a.frame_interval;
  config.validate();

  std::vector<FrameObservation> frames;
  TrackTable event_tracks;
  if (!a.tracks.empty()) {
    frames = replay_observations(load_feature_tracks(a.tracks), config);
  } else {
    const EventStream stream = load_event_stream(a.events, config.width, config.height);
    if (!stream.non_monotonic_lines.empty()) {
      err << "warning [event_io] " << stream.non_monotonic_lines.size()
          << " non-monotonic timestamps, first at line "
          << stream.non_monotonic_lines.front() << "\n";
    }
    std::vector<Event> events = stream.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& x, const Event& y) { return x.t < y.t; });
    EventFrontend frontend(config);
    for (const EventFrame& f :
         partition_frames(events, config.frame_interval, config.width, config.height)) {
      frames.push_back(frontend.process(f));
    }
    event_tracks = frontend.tracks();
  }

  VoPipeline pipeline(config, PipelineOptions{a.deterministic});
  for (const auto& f : frames) {
    pipeline.process(f);
    if (pipeline.mode() == PipelineMode::kLost) break;
  }
  pipeline.finish();

  const fs::path dir(a.out);
  fs::create_directories(dir);
  const auto trajectory = pipeline.trajectory();
  write_trajectory(dir / "trajectory.txt", trajectory);
  pipeline.map().write_points(dir / "map.txt");
  const RunReport report = pipeline.report();
  write_text(dir / "run_report.txt", format_run_report(report));
  if (!a.events.empty()) write_feature_tracks(dir / "tracks.txt", event_tracks);
  out << format_run_report(report);

  if (!a.ground_truth.empty() && trajectory.size() >= 3) {
    const auto gt = load_trajectory(a.ground_truth);
    const ErrorReport e =
        evaluate_trajectory(trajectory, gt, parse_alignment_mode(a.mode));
    write_error_csv(dir / "errors.csv", e);
    write_error_dat(dir / "errors.dat", e);
    write_text(dir / "error_summary.txt", format_error_table(e));
    out << format_error_table(e);
  }

  if (report.final_mode == PipelineMode::kLost) {
    err << "error [vo_pipeline] tracking lost at frame " << *report.lost_at << "\n";
    return kExitLost;
  }
  if (report.final_mode != PipelineMode::kTracking) {
    err << "error [vo_pipeline] tracking was never established ("
        << to_string(report.final_mode) << ")\n";
    return kExitLost;
  }
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SceneSpec spec = a.spec.empty() ? SceneSpec{} : load_scene_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  if (a.keyframe_period) spec.keyframe_period = *a.keyframe_period;
  if (a.frame_interval) spec.frame_interval = *a.frame_interval;
  const SyntheticScene scene = generate_scene(spec);
  const fs::path dir(a.out);
  write_scene(scene, dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  char buf[64];
  for (const auto& f : files) {
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(f)));
    out << buf << "  " << f.filename().string() << "\n";
  }
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto estimate = load_trajectory(a.estimate);
  const auto gt = load_trajectory(a.ground_truth);
  const ErrorReport e = evaluate_trajectory(estimate, gt, parse_alignment_mode(a.mode));
  if (!a.out.empty()) {
    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_error_csv(dir / "errors.csv", e);
    write_error_dat(dir / "errors.dat", e);
    write_text(dir / "error_summary.txt", format_error_table(e));
  }
  out << format_error_table(e);
  return kExitOk;
}

int cmd_track_stats(const StatsArgs& a, std::ostream& out) {
  const LifetimeStats stats =
      compute_lifetime_stats(load_feature_tracks(a.tracks), a.min_lifetime, a.max_birth);
  out << format_lifetime_table(stats, fs::path(a.tracks).stem().string());
  if (stats.empty) {
    out << "no feature reaches the minimum lifetime of " << a.min_lifetime << "\n";
    return kExitOk;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "features %zu mean %.4f std %.4f\n", stats.count,
                stats.mean, stats.stddev);
  out << buf;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-camera monocular visual odometry"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Estimate a trajectory from events or tracks");
  run_cmd->add_option("--config", run_args.config, "key = value config file")->required();
  run_cmd->add_option("--events", run_args.events, "event file 't x y p'");
  run_cmd->add_option("--tracks", run_args.tracks, "track file 'frame id u v'");
  run_cmd->add_option("--ground-truth", run_args.ground_truth,
                      "optional trajectory to evaluate against");
  run_cmd->add_option("--mode", run_args.mode, "alignment: rigid or rigid+scale");
  run_cmd->add_option("--out", run_args.out, "output directory")->required();
  run_cmd->add_option("--seed", run_args.seed, "seed override");
  run_cmd->add_flag("--deterministic", run_args.deterministic,
                    "single-lane execution (bit-reproducible)");
  run_cmd->add_option("--keyframe-period", run_args.keyframe_period);
  run_cmd->add_option("--frame-interval", run_args.frame_interval);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene");
  synth_cmd->add_option("--spec", synth_args.spec, "scene spec (key = value)");
  synth_cmd->add_option("--out", synth_args.out, "output directory")->required();
  synth_cmd->add_option("--seed", synth_args.seed, "seed override");
  synth_cmd->add_option("--keyframe-period", synth_args.keyframe_period);
  synth_cmd->add_option("--frame-interval", synth_args.frame_interval);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Compare a trajectory with ground truth");
  eval_cmd->add_option("--estimate", eval_args.estimate)->required();
  eval_cmd->add_option("--ground-truth", eval_args.ground_truth)->required();
  eval_cmd->add_option("--mode", eval_args.mode, "rigid or rigid+scale");
  eval_cmd->add_option("--out", eval_args.out, "directory for CSV output");

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("track-stats", "Feature lifetime statistics");
  stats_cmd->add_option("--tracks", stats_args.tracks)->required();
  stats_cmd->add_option("--min-lifetime", stats_args.min_lifetime);
  stats_cmd->add_option("--max-birth", stats_args.max_birth,
                        "ignore features born after this frame");

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(),
                               args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_args, out, err);
    if (synth_cmd->parsed()) return cmd_synth(synth_args, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, out);
    if (stats_cmd->parsed()) return cmd_track_stats(stats_args, out);
  } catch (const Error& e) {
    err << "error " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error [cli] " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace eventvo::cli
