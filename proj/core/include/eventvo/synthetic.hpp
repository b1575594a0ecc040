#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eventvo/config.hpp"
#include "eventvo/event_io.hpp"
#include "eventvo/geometry.hpp"

namespace eventvo {

// Forward drive with one smooth heading change through a corridor of
// landmarks. World is z-up; the camera looks along the heading.
struct SceneSpec {
  int n_frames = 200;
  double frame_interval = 0.05;  // seconds
  double speed = 6.0;            // m/s
  double turn_angle_deg = 45.0;
  double turn_start = 0.35;      // fraction of the run
  double turn_end = 0.65;

  int n_landmarks = 500;
  double lateral_min = 2.5;  // corridor half-width band, metres
  double lateral_max = 10.0;
  double height_min = -1.5;
  double height_max = 6.0;
  double lookahead = 40.0;   // corridor length beyond the final position
  double clearance = 1.0;    // minimum landmark distance to the camera path

  CameraIntrinsics camera{226.0, 226.0, 173.0, 130.0, 346, 260};
  double min_depth = 0.5;
  double max_depth = 30.0;  // sensing range; farther landmarks are not observed
  double border = 2.0;  // pixels kept free at the sensor edge

  double noise_sigma = 1.0;  // pixels
  double outlier_rate = 0.0;
  double outlier_magnitude = 20.0;  // pixels, uniform per axis
  double loss_rate = 0.05;          // per frame

  int max_features = 100;
  int keyframe_period = 5;
  int refill_threshold = 20;

  bool render_events = false;
  int events_per_feature = 40;  // per frame

  std::uint64_t seed = 0;

  // Throws Error(kValidation) naming the offending key.
  void validate() const;
};

SceneSpec parse_scene_spec(std::istream& in, const std::string& source);
SceneSpec load_scene_spec(const std::filesystem::path& path);
std::string to_scene_spec_text(const SceneSpec& spec);

struct SyntheticScene {
  SceneSpec spec;
  std::vector<Eigen::Vector3d> landmarks;  // world frame
  std::vector<StampedPose> trajectory;     // camera-to-world per frame
  TrackTable tracks;                       // noisy observations
  std::map<int, int> feature_landmark;     // feature id -> landmark index
  std::vector<Event> events;               // only with render_events
};

SyntheticScene generate_scene(const SceneSpec& spec);

// Camera-to-world rotation for a heading angle about +z.
Eigen::Matrix3d camera_rotation(double heading);

// Config matching the scene's sensor, timing and keyframe policy.
Config suggested_config(const SceneSpec& spec);

// Writes tracks.txt, groundtruth.txt, landmarks.txt, config.txt, spec.txt and
// events.txt (when rendered) into `dir`.
void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace eventvo
