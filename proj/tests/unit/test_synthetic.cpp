#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "eventvo/error.hpp"
#include "eventvo/lifetime.hpp"
#include "eventvo/synthetic.hpp"

using namespace eventvo;

namespace {

SceneSpec small_spec() {
  SceneSpec s;
  s.n_frames = 60;
  s.n_landmarks = 200;
  return s;
}

bool same_tracks(const TrackTable& a, const TrackTable& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [frame, obs] : a) {
    auto it = b.find(frame);
    if (it == b.end() || it->second.size() != obs.size()) return false;
    for (const auto& [id, px] : obs) {
      auto jt = it->second.find(id);
      if (jt == it->second.end() || jt->second != px) return false;
    }
  }
  return true;
}

}  // namespace

TEST(Synthetic, SeedDeterminesScene) {
  const SceneSpec spec = small_spec();
  const SyntheticScene a = generate_scene(spec);
  const SyntheticScene b = generate_scene(spec);
  EXPECT_TRUE(same_tracks(a.tracks, b.tracks));
  ASSERT_EQ(a.landmarks.size(), b.landmarks.size());
  for (std::size_t i = 0; i < a.landmarks.size(); ++i) EXPECT_EQ(a.landmarks[i], b.landmarks[i]);
  SceneSpec other = spec;
  other.seed = 1;
  EXPECT_FALSE(same_tracks(a.tracks, generate_scene(other).tracks));
}

TEST(Synthetic, NoiselessTracksAreProjections) {
  SceneSpec spec = small_spec();
  spec.noise_sigma = 0.0;
  const SyntheticScene s = generate_scene(spec);
  int checked = 0;
  for (const auto& [frame, obs] : s.tracks) {
    const PoseSE3 t_cw = s.trajectory[frame].pose.inverse();
    for (const auto& [id, px] : obs) {
      const Eigen::Vector3d pc = t_cw * s.landmarks[s.feature_landmark.at(id)];
      EXPECT_GE(pc.z(), spec.min_depth);
      EXPECT_LE(pc.z(), spec.max_depth);
      EXPECT_LT((project(pc, spec.camera) - px).norm(), 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Synthetic, TrajectoryShape) {
  const SceneSpec spec;
  const SyntheticScene s = generate_scene(spec);
  ASSERT_EQ(s.trajectory.size(), 200u);
  double length = 0.0;
  for (std::size_t k = 1; k < s.trajectory.size(); ++k) {
    length += (s.trajectory[k].pose.translation() - s.trajectory[k - 1].pose.translation()).norm();
    EXPECT_NEAR(s.trajectory[k].t - s.trajectory[k - 1].t, spec.frame_interval, 1e-12);
    EXPECT_EQ(s.trajectory[k].pose.translation().z(), 0.0);
  }
  EXPECT_NEAR(length, spec.speed * spec.frame_interval * 199, 1e-6);
  // Camera looks along the heading: optical axis of the last frame is turned
  // by the full turn angle about +z.
  const Eigen::Vector3d axis = s.trajectory.back().pose.rotation().col(2);
  EXPECT_NEAR(std::atan2(axis.y(), axis.x()), spec.turn_angle_deg * M_PI / 180.0, 1e-9);
  EXPECT_NEAR(axis.z(), 0.0, 1e-12);
}

TEST(Synthetic, FeaturesLiveAtLeastTwoFrames) {
  const SyntheticScene s = generate_scene(SceneSpec{});
  const auto life = feature_lifetimes(s.tracks);
  int short_lived = 0;
  for (const auto& [id, l] : life) {
    if (l.lifetime < 2 && l.birth_frame < 199) ++short_lived;
  }
  // Geometric lifetimes of 1 frame occur with probability loss_rate.
  EXPECT_LT(short_lived, static_cast<int>(0.1 * life.size()));
}

TEST(Synthetic, MeanLifetimeFollowsLossRate) {
  const SyntheticScene s = generate_scene(SceneSpec{});
  const LifetimeStats st = compute_lifetime_stats(s.tracks, 1, 100);
  EXPECT_NEAR(st.mean, 20.0, 2.0);
}

TEST(Synthetic, Validation) {
  SceneSpec s;
  s.lateral_min = 0.5;  // inside the clearance zone: camera runs through the cloud
  EXPECT_THROW(generate_scene(s), Error);
  s = SceneSpec{};
  s.max_depth = 0.1;
  EXPECT_THROW(generate_scene(s), Error);
  s = SceneSpec{};
  s.loss_rate = 1.0;
  EXPECT_THROW(s.validate(), Error);
}

TEST(Synthetic, SpecTextRoundTrip) {
  SceneSpec s;
  s.noise_sigma = 0.0;
  s.seed = 77;
  s.render_events = true;
  const std::string text = to_scene_spec_text(s);
  std::istringstream in(text);
  const SceneSpec back = parse_scene_spec(in, "spec");
  EXPECT_EQ(to_scene_spec_text(back), text);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_TRUE(back.render_events);
  std::istringstream bad("n_frames = 10\nwarp_factor = 9\n");
  EXPECT_THROW(parse_scene_spec(bad, "spec"), Error);
}

TEST(Synthetic, SuggestedConfigMatchesSensor) {
  const SceneSpec s;
  const Config c = suggested_config(s);
  EXPECT_EQ(c.width, s.camera.width);
  EXPECT_DOUBLE_EQ(c.fx, s.camera.fx);
  EXPECT_DOUBLE_EQ(c.frame_interval, s.frame_interval);
  EXPECT_EQ(c.keyframe_period, s.keyframe_period);
  EXPECT_NO_THROW(c.validate());
}

TEST(Synthetic, EventsFollowTracks) {
  SceneSpec s = small_spec();
  s.n_frames = 10;
  s.render_events = true;
  const SyntheticScene scene = generate_scene(s);
  ASSERT_FALSE(scene.events.empty());
  for (std::size_t i = 1; i < scene.events.size(); ++i) {
    EXPECT_LE(scene.events[i - 1].t, scene.events[i].t);
  }
  for (const Event& e : scene.events) {
    EXPECT_GE(e.x, 0);
    EXPECT_LT(e.x, s.camera.width);
  }
}

TEST(Synthetic, WriteScene) {
  const auto dir = std::filesystem::temp_directory_path() / "eventvo_scene_test";
  std::filesystem::remove_all(dir);
  write_scene(generate_scene(small_spec()), dir);
  for (const char* f : {"tracks.txt", "groundtruth.txt", "landmarks.txt", "config.txt", "spec.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "events.txt"));
  const SceneSpec back = load_scene_spec(dir / "spec.txt");
  EXPECT_EQ(back.n_frames, 60);
  std::filesystem::remove_all(dir);
}
