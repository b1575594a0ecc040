#include "eventvo/global_map.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>

#include "eventvo/error.hpp"

namespace eventvo {

std::size_t GlobalMap::add_points(
    const std::vector<std::pair<int, Eigen::Vector3d>>& batch) {
  std::unique_lock lock(mutex_);
  std::size_t added = 0;
  for (const auto& [id, p] : batch) added += points_.emplace(id, p).second ? 1 : 0;
  return added;
}

void GlobalMap::update_points(
    const std::vector<std::pair<int, Eigen::Vector3d>>& batch) {
  std::unique_lock lock(mutex_);
  for (const auto& [id, p] : batch) {
    auto it = points_.find(id);
    if (it != points_.end()) it->second = p;
  }
}

std::optional<Eigen::Vector3d> GlobalMap::point(int id) const {
  std::shared_lock lock(mutex_);
  auto it = points_.find(id);
  if (it == points_.end()) return std::nullopt;
  return it->second;
}

std::map<int, Eigen::Vector3d> GlobalMap::points() const {
  std::shared_lock lock(mutex_);
  return points_;
}

std::size_t GlobalMap::size() const {
  std::shared_lock lock(mutex_);
  return points_.size();
}

void GlobalMap::add_keyframe(Keyframe keyframe) {
  std::unique_lock lock(mutex_);
  const int id = keyframe.frame_id;
  keyframes_.insert_or_assign(id, std::move(keyframe));
}

std::optional<Keyframe> GlobalMap::keyframe(int frame_id) const {
  std::shared_lock lock(mutex_);
  auto it = keyframes_.find(frame_id);
  if (it == keyframes_.end()) return std::nullopt;
  return it->second;
}

std::size_t GlobalMap::keyframe_count() const {
  std::shared_lock lock(mutex_);
  return keyframes_.size();
}

void GlobalMap::set_keyframe_pose(int frame_id, const PoseSE3& pose) {
  std::unique_lock lock(mutex_);
  auto it = keyframes_.find(frame_id);
  if (it != keyframes_.end()) it->second.pose = pose;
}

void GlobalMap::write_points(const std::filesystem::path& path) const {
  const auto snapshot = points();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "vo_pipeline", "cannot write " + path.string());
  char buf[160];
  for (const auto& [id, p] : snapshot) {
    std::snprintf(buf, sizeof(buf), "%d %.9g %.9g %.9g\n", id, p.x(), p.y(), p.z());
    out << buf;
  }
}

}  // namespace eventvo
