#include "eventvo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <type_traits>

#include "eventvo/error.hpp"
#include "eventvo/vo_pipeline.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "synth_eval";

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

struct PathSample {
  Eigen::Vector3d position;
  double heading;
};

// Dense centreline (positions and headings) covering the run plus the
// lookahead, sampled every `step` metres of arc length.
std::vector<PathSample> centreline(const std::vector<StampedPose>& traj,
                                   const std::vector<double>& headings,
                                   double lookahead, double step) {
  std::vector<PathSample> out;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const Eigen::Vector3d a = traj[k].pose.translation();
    const Eigen::Vector3d b = traj[k + 1].pose.translation();
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i < n; ++i) {
      const double s = static_cast<double>(i) / n;
      out.push_back({a + s * (b - a),
                     headings[k] + s * (headings[k + 1] - headings[k])});
    }
  }
  const PathSample last{traj.back().pose.translation(), headings.back()};
  const Eigen::Vector3d dir(std::cos(last.heading), std::sin(last.heading), 0.0);
  for (double s = 0.0; s <= lookahead; s += step) {
    out.push_back({last.position + s * dir, last.heading});
  }
  return out;
}

}  // namespace

void SceneSpec::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(ErrorCode::kValidation, kModule, "scene key '" + key + "' " + why);
  };
  if (n_frames < 2) fail("n_frames", "must be >= 2");
  if (!(frame_interval > 0.0)) fail("frame_interval", "must be positive");
  if (!(speed >= 0.0)) fail("speed", "must be non-negative");
  if (!(turn_start >= 0.0 && turn_end <= 1.0 && turn_start < turn_end)) {
    fail("turn_start", "and turn_end must satisfy 0 <= start < end <= 1");
  }
  if (n_landmarks <= 0) fail("n_landmarks", "must be positive");
  if (!(lateral_max > lateral_min)) fail("lateral_max", "must exceed lateral_min");
  if (!(clearance > 0.0)) fail("clearance", "must be positive");
  if (lateral_min < clearance) {
    fail("lateral_min", "is below the clearance: the camera path runs through "
                        "the landmark cloud");
  }
  if (!(height_max >= height_min)) fail("height_max", "must be >= height_min");
  camera.validate();
  if (!(min_depth > 0.0)) fail("min_depth", "must be positive");
  if (!(max_depth > min_depth)) fail("max_depth", "must exceed min_depth");
  if (noise_sigma < 0.0) fail("noise_sigma", "must be non-negative");
  if (outlier_rate < 0.0 || outlier_rate > 1.0) fail("outlier_rate", "must lie in [0, 1]");
  if (loss_rate < 0.0 || loss_rate >= 1.0) fail("loss_rate", "must lie in [0, 1)");
  if (max_features <= 0) fail("max_features", "must be positive");
  if (keyframe_period <= 0) fail("keyframe_period", "must be positive");
  if (events_per_feature < 0) fail("events_per_feature", "must be non-negative");
}

SceneSpec parse_scene_spec(std::istream& in, const std::string& source) {
  const KeyValueFile f = KeyValueFile::parse(in, source);
  static const std::set<std::string> known = {
      "n_frames", "frame_interval", "speed", "turn_angle_deg", "turn_start",
      "turn_end", "n_landmarks", "lateral_min", "lateral_max", "height_min",
      "height_max", "lookahead", "clearance", "width", "height", "fx", "fy",
      "cx", "cy", "min_depth", "max_depth", "border", "noise_sigma", "outlier_rate",
      "outlier_magnitude", "loss_rate", "max_features", "keyframe_period",
      "refill_threshold", "render_events", "events_per_feature", "seed"};
  for (const auto& [key, value] : f.values()) {
    (void)value;
    if (!known.count(key)) {
      throw Error(ErrorCode::kConfig, kModule,
                  source + ": unknown scene key '" + key + "'");
    }
  }
  SceneSpec s;
  s.n_frames = f.get_int("n_frames", s.n_frames);
  s.frame_interval = f.get_double("frame_interval", s.frame_interval);
  s.speed = f.get_double("speed", s.speed);
  s.turn_angle_deg = f.get_double("turn_angle_deg", s.turn_angle_deg);
  s.turn_start = f.get_double("turn_start", s.turn_start);
  s.turn_end = f.get_double("turn_end", s.turn_end);
  s.n_landmarks = f.get_int("n_landmarks", s.n_landmarks);
  s.lateral_min = f.get_double("lateral_min", s.lateral_min);
  s.lateral_max = f.get_double("lateral_max", s.lateral_max);
  s.height_min = f.get_double("height_min", s.height_min);
  s.height_max = f.get_double("height_max", s.height_max);
  s.lookahead = f.get_double("lookahead", s.lookahead);
  s.clearance = f.get_double("clearance", s.clearance);
  s.camera.width = f.get_int("width", s.camera.width);
  s.camera.height = f.get_int("height", s.camera.height);
  s.camera.fx = f.get_double("fx", s.camera.fx);
  s.camera.fy = f.get_double("fy", s.camera.fy);
  s.camera.cx = f.get_double("cx", s.camera.cx);
  s.camera.cy = f.get_double("cy", s.camera.cy);
  s.min_depth = f.get_double("min_depth", s.min_depth);
  s.max_depth = f.get_double("max_depth", s.max_depth);
  s.border = f.get_double("border", s.border);
  s.noise_sigma = f.get_double("noise_sigma", s.noise_sigma);
  s.outlier_rate = f.get_double("outlier_rate", s.outlier_rate);
  s.outlier_magnitude = f.get_double("outlier_magnitude", s.outlier_magnitude);
  s.loss_rate = f.get_double("loss_rate", s.loss_rate);
  s.max_features = f.get_int("max_features", s.max_features);
  s.keyframe_period = f.get_int("keyframe_period", s.keyframe_period);
  s.refill_threshold = f.get_int("refill_threshold", s.refill_threshold);
  s.render_events = f.get_bool("render_events", s.render_events);
  s.events_per_feature = f.get_int("events_per_feature", s.events_per_feature);
  s.seed = f.get_uint64("seed", s.seed);
  s.validate();
  return s;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, kModule, "cannot open " + path.string());
  return parse_scene_spec(in, path.string());
}

std::string to_scene_spec_text(const SceneSpec& s) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  auto put = [&os](const char* key, const auto& value) {
    os << key << " = ";
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(value)>>) {
      os << format_number(value) << '\n';
    } else {
      os << value << '\n';
    }
  };
  put("n_frames", s.n_frames);
  put("frame_interval", s.frame_interval);
  put("speed", s.speed);
  put("turn_angle_deg", s.turn_angle_deg);
  put("turn_start", s.turn_start);
  put("turn_end", s.turn_end);
  put("n_landmarks", s.n_landmarks);
  put("lateral_min", s.lateral_min);
  put("lateral_max", s.lateral_max);
  put("height_min", s.height_min);
  put("height_max", s.height_max);
  put("lookahead", s.lookahead);
  put("clearance", s.clearance);
  put("width", s.camera.width);
  put("height", s.camera.height);
  put("fx", s.camera.fx);
  put("fy", s.camera.fy);
  put("cx", s.camera.cx);
  put("cy", s.camera.cy);
  put("min_depth", s.min_depth);
  put("max_depth", s.max_depth);
  put("border", s.border);
  put("noise_sigma", s.noise_sigma);
  put("outlier_rate", s.outlier_rate);
  put("outlier_magnitude", s.outlier_magnitude);
  put("loss_rate", s.loss_rate);
  put("max_features", s.max_features);
  put("keyframe_period", s.keyframe_period);
  put("refill_threshold", s.refill_threshold);
  put("render_events", s.render_events ? "true" : "false");
  put("events_per_feature", s.events_per_feature);
  put("seed", s.seed);
  return os.str();
}

Eigen::Matrix3d camera_rotation(double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Eigen::Matrix3d r;
  // Columns: camera x (right), y (down), z (forward) in world coordinates.
  r.col(0) = Eigen::Vector3d(s, -c, 0.0);
  r.col(1) = Eigen::Vector3d(0.0, 0.0, -1.0);
  r.col(2) = Eigen::Vector3d(c, s, 0.0);
  return r;
}

Config suggested_config(const SceneSpec& spec) {
  Config c;
  c.width = spec.camera.width;
  c.height = spec.camera.height;
  c.fx = spec.camera.fx;
  c.fy = spec.camera.fy;
  c.cx = spec.camera.cx;
  c.cy = spec.camera.cy;
  c.frame_interval = spec.frame_interval;
  c.max_features = spec.max_features;
  c.keyframe_period = spec.keyframe_period;
  c.refill_threshold = spec.refill_threshold;
  c.seed = spec.seed;
  return c;
}

SyntheticScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  SyntheticScene scene;
  scene.spec = spec;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Trajectory.
  const double turn = spec.turn_angle_deg * std::numbers::pi / 180.0;
  std::vector<double> headings(spec.n_frames);
  for (int k = 0; k < spec.n_frames; ++k) {
    const double u = static_cast<double>(k) / (spec.n_frames - 1);
    headings[k] = turn * smoothstep((u - spec.turn_start) /
                                    (spec.turn_end - spec.turn_start));
  }
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  for (int k = 0; k < spec.n_frames; ++k) {
    if (k > 0) {
      const double h = 0.5 * (headings[k - 1] + headings[k]);
      position += spec.speed * spec.frame_interval *
                  Eigen::Vector3d(std::cos(h), std::sin(h), 0.0);
    }
    scene.trajectory.push_back(
        {k * spec.frame_interval, PoseSE3(camera_rotation(headings[k]), position)});
  }

  // Landmarks beside the centreline, kept clear of every camera position.
  const auto path = centreline(scene.trajectory, headings, spec.lookahead, 0.05);
  auto clear = [&](const Eigen::Vector3d& p) {
    for (const auto& sp : scene.trajectory) {
      if ((p - sp.pose.translation()).head<2>().norm() < spec.clearance) return false;
    }
    return true;
  };
  for (int i = 0; i < spec.n_landmarks; ++i) {
    Eigen::Vector3d p;
    int attempts = 0;
    do {
      const auto& c = path[std::min(path.size() - 1,
                                    static_cast<std::size_t>(unit(rng) * path.size()))];
      const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
      const double lateral =
          spec.lateral_min + unit(rng) * (spec.lateral_max - spec.lateral_min);
      const double height =
          spec.height_min + unit(rng) * (spec.height_max - spec.height_min);
      const Eigen::Vector3d left(-std::sin(c.heading), std::cos(c.heading), 0.0);
      p = c.position + side * lateral * left + Eigen::Vector3d(0.0, 0.0, height);
      if (++attempts > 1000) {
        throw Error(ErrorCode::kValidation, kModule,
                    "cannot place landmarks outside the clearance zone");
      }
    } while (!clear(p));
    scene.landmarks.push_back(p);
  }

  // Visibility table and run lengths (frames visible from k onwards).
  const int n = spec.n_frames;
  const int m = spec.n_landmarks;
  std::vector<std::vector<std::optional<Eigen::Vector2d>>> pixels(
      n, std::vector<std::optional<Eigen::Vector2d>>(m));
  for (int k = 0; k < n; ++k) {
    const PoseSE3 t_cw = scene.trajectory[k].pose.inverse();
    for (int j = 0; j < m; ++j) {
      const Eigen::Vector3d pc = t_cw * scene.landmarks[j];
      if (pc.z() < spec.min_depth || pc.z() > spec.max_depth) continue;
      const Eigen::Vector2d px = project(pc, spec.camera);
      if (spec.camera.contains(px, spec.border)) pixels[k][j] = px;
    }
  }
  std::vector<std::vector<int>> run(n + 1, std::vector<int>(m, 0));
  for (int k = n - 1; k >= 0; --k) {
    for (int j = 0; j < m; ++j) run[k][j] = pixels[k][j] ? run[k + 1][j] + 1 : 0;
  }

  struct Active {
    int id;
    int landmark;
    int remaining;  // frames left including the current one
  };
  std::vector<Active> active;
  std::set<int> tracked;
  int next_id = 0;
  const int unlimited = std::numeric_limits<int>::max();
  auto draw_lifetime = [&]() {
    if (spec.loss_rate <= 0.0) return unlimited;
    std::geometric_distribution<int> geo(spec.loss_rate);
    return geo(rng) + 1;
  };

  for (int k = 0; k < n; ++k) {
    // Expire features that reached their lifetime or left the view.
    std::vector<Active> kept;
    for (Active a : active) {
      if (a.remaining == unlimited || --a.remaining > 0) {
        if (pixels[k][a.landmark]) {
          kept.push_back(a);
          continue;
        }
      }
      tracked.erase(a.landmark);
    }
    active = std::move(kept);

    if (keyframe_due(k, static_cast<int>(active.size()), spec.keyframe_period,
                     spec.refill_threshold)) {
      while (static_cast<int>(active.size()) < spec.max_features) {
        const int life = draw_lifetime();
        std::vector<int> candidates;
        int best = -1;
        for (int j = 0; j < m; ++j) {
          if (tracked.count(j) || run[k][j] == 0) continue;
          if (run[k][j] >= std::min(life, n - k)) candidates.push_back(j);
          if (best < 0 || run[k][j] > run[k][best]) best = j;
        }
        if (best < 0) break;
        const int pick =
            candidates.empty()
                ? best
                : candidates[std::min(
                      candidates.size() - 1,
                      static_cast<std::size_t>(unit(rng) * candidates.size()))];
        active.push_back({next_id, pick, life});
        scene.feature_landmark[next_id] = pick;
        tracked.insert(pick);
        ++next_id;
      }
    }

    for (const Active& a : active) {
      Eigen::Vector2d px = *pixels[k][a.landmark];
      if (spec.noise_sigma > 0.0) {
        px += spec.noise_sigma * Eigen::Vector2d(gauss(rng), gauss(rng));
      }
      if (spec.outlier_rate > 0.0 && unit(rng) < spec.outlier_rate) {
        px += spec.outlier_magnitude *
              Eigen::Vector2d(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
      }
      px.x() = std::clamp(px.x(), 0.0, spec.camera.width - 1.0);
      px.y() = std::clamp(px.y(), 0.0, spec.camera.height - 1.0);
      scene.tracks[k][a.id] = px;
    }

    if (spec.render_events && k + 1 < n) {
      // Each tracked landmark drags an L-shaped corner glyph along its image
      // path during the interval.
      for (const Active& a : active) {
        const auto& p0 = pixels[k][a.landmark];
        const auto& p1 = pixels[k + 1][a.landmark];
        if (!p0) continue;
        const Eigen::Vector2d end = p1 ? *p1 : *p0;
        for (int e = 0; e < spec.events_per_feature; ++e) {
          const double s = unit(rng);
          const double arm = 4.0 * unit(rng);
          const bool horizontal = unit(rng) < 0.5;
          Eigen::Vector2d q = *p0 + s * (end - *p0);
          q += horizontal ? Eigen::Vector2d(arm, 0.0) : Eigen::Vector2d(0.0, arm);
          const int x = static_cast<int>(std::lround(q.x()));
          const int y = static_cast<int>(std::lround(q.y()));
          if (x < 0 || y < 0 || x >= spec.camera.width || y >= spec.camera.height) continue;
          scene.events.push_back({(k + s) * spec.frame_interval, x, y,
                                  unit(rng) < 0.5 ? -1 : 1});
        }
      }
    }
  }
  std::stable_sort(scene.events.begin(), scene.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return scene;
}

void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_feature_tracks(dir / "tracks.txt", scene.tracks);
  write_trajectory(dir / "groundtruth.txt", scene.trajectory);
  {
    std::ofstream out(dir / "landmarks.txt");
    if (!out) throw Error(ErrorCode::kIo, kModule, "cannot write landmarks");
    char buf[128];
    for (std::size_t i = 0; i < scene.landmarks.size(); ++i) {
      const auto& p = scene.landmarks[i];
      std::snprintf(buf, sizeof(buf), "%zu %.9g %.9g %.9g\n", i, p.x(), p.y(), p.z());
      out << buf;
    }
  }
  {
    std::ofstream out(dir / "config.txt");
    if (!out) throw Error(ErrorCode::kIo, kModule, "cannot write config");
    out << to_config_text(suggested_config(scene.spec));
  }
  {
    std::ofstream out(dir / "spec.txt");
    if (!out) throw Error(ErrorCode::kIo, kModule, "cannot write spec");
    out << to_scene_spec_text(scene.spec);
  }
  if (scene.spec.render_events) write_event_stream(dir / "events.txt", scene.events);
}

}  // namespace eventvo
