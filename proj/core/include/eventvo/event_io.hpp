#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eventvo/geometry.hpp"

namespace eventvo {

/// One brightness-change sample. Polarity is -1 or +1.
struct Event {
  double t = 0.0;
  int x = 0;
  int y = 0;
  int polarity = 1;
};

struct EventStream {
  std::vector<Event> events;
  // 1-based lines whose timestamp precedes the previous event's.
  std::vector<std::size_t> non_monotonic_lines;
};

// "t x y p" per line with p in {0, 1}; p = 0 maps to -1. Blank lines and
// lines starting with '#' are skipped. Throws Error with the offending line
// number on malformed input (kParse) or out-of-sensor coordinates
// (kValidation).
EventStream parse_event_stream(std::istream& in, int width, int height,
                               const std::string& source = "<stream>");
EventStream load_event_stream(const std::filesystem::path& path, int width,
                              int height);
void write_event_stream(const std::filesystem::path& path,
                        std::span<const Event> events);

using FeatureObservations = std::map<int, Eigen::Vector2d>;  // id -> (u, v)
using TrackTable = std::map<int, FeatureObservations>;       // frame -> obs

// "frame_id feature_id u v" per line. Duplicate (frame, feature) pairs are
// rejected with kValidation.
TrackTable parse_feature_tracks(std::istream& in,
                                const std::string& source = "<stream>");
TrackTable load_feature_tracks(const std::filesystem::path& path);
void write_feature_tracks(const std::filesystem::path& path,
                          const TrackTable& tracks);

struct StampedPose {
  double t = 0.0;
  PoseSE3 pose;  // camera-to-world
};

// "t tx ty tz qx qy qz qw": time with nine decimals, pose values with nine
// significant digits, unit quaternion with qw >= 0.
std::string format_trajectory_line(const StampedPose& pose);
// Throws kPrecondition unless timestamps are strictly increasing and kIo
// (naming the path) if the file cannot be written.
void write_trajectory(const std::filesystem::path& path,
                      std::span<const StampedPose> poses);
std::vector<StampedPose> parse_trajectory(std::istream& in,
                                          const std::string& source);
std::vector<StampedPose> load_trajectory(const std::filesystem::path& path);

}  // namespace eventvo
