#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eventvo/event_io.hpp"
#include "eventvo/geometry.hpp"

namespace eventvo {

struct Keyframe {
  int frame_id = 0;
  PoseSE3 pose;  // camera-to-world
  FeatureObservations features;
};

// Map points and keyframes shared between the tracking lane and the mapping
// lane. Promotions never overwrite a point; only window refinement moves
// existing points and keyframe poses.
class GlobalMap {
 public:
  // Inserts the whole batch under one lock; ids already present are left
  // untouched. Returns the number of points actually added.
  std::size_t add_points(const std::vector<std::pair<int, Eigen::Vector3d>>& batch);
  std::optional<Eigen::Vector3d> point(int id) const;
  std::map<int, Eigen::Vector3d> points() const;
  std::size_t size() const;
  // Overwrites the listed points that exist; unknown ids are ignored.
  void update_points(const std::vector<std::pair<int, Eigen::Vector3d>>& batch);

  void add_keyframe(Keyframe keyframe);
  std::optional<Keyframe> keyframe(int frame_id) const;
  std::size_t keyframe_count() const;
  void set_keyframe_pose(int frame_id, const PoseSE3& pose);

  // "id x y z" per line.
  void write_points(const std::filesystem::path& path) const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<int, Eigen::Vector3d> points_;
  std::map<int, Keyframe> keyframes_;
};

}  // namespace eventvo
