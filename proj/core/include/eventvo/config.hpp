#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>

#include "eventvo/geometry.hpp"

namespace eventvo {

// Flat "key = value" file with '#' comments. Keys are matched exactly.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, const std::string& source);
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Typed accessors; the required variants throw Error(kConfig) naming the
  // missing key, all of them throw on malformed numbers.
  double require_double(const std::string& key) const;
  int require_int(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;

  const std::string& source() const { return source_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  std::string source_;

  std::size_t line_of(const std::string& key) const;
};

// Locale-independent number parsing shared by every text reader.
bool parse_double(std::string_view token, double& out);
bool parse_int(std::string_view token, long long& out);
// Shortest text that parses back to the same double.
std::string format_number(double value);

struct Config {
  // Sensor and intrinsics (required keys).
  int width = 0;
  int height = 0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  // Frame building.
  double frame_interval = 0.03;   // seconds
  int flow_window = 7;            // EM window radius, pixels
  int max_features = 100;
  double min_distance = 5.0;      // Harris suppression radius, pixels
  int patch_size = 15;
  int track_max_iterations = 30;
  double track_loss_ratio = 0.8;

  // Keyframes.
  int keyframe_period = 5;
  int refill_threshold = 20;

  // Pose optimization.
  int gn_max_iterations = 20;
  double gn_step_tolerance = 1e-8;
  double huber_delta = 1.5;  // pixels

  // Depth filter, in map units.
  double depth_min = 0.5;
  double depth_max = 50.0;
  double depth_convergence_ratio = 0.005;
  double depth_outlier_ratio = 0.1;  // filters with E[rho] below are dropped
  // Measurements whose ray angle spans fewer pixels than this are skipped.
  double depth_min_parallax = 3.0;

  // Window refinement: keyframes per bundle adjustment, 0 disables it.
  int ba_window = 8;
  int ba_iterations = 10;

  // Pipeline.
  int queue_capacity = 64;
  int min_tracked_features = 8;
  double bootstrap_min_disparity = 10.0;  // median pixel displacement
  double bootstrap_baseline = 1.0;        // ||t|| assigned at bootstrap
  std::uint64_t seed = 0;

  CameraIntrinsics camera() const;
  // Throws Error(kConfig) naming the offending key.
  void validate() const;
};

Config config_from(const KeyValueFile& file);
Config load_config(const std::filesystem::path& path);
Config parse_config(std::istream& in, const std::string& source);
// Serialized form accepted by parse_config.
std::string to_config_text(const Config& config);

}  // namespace eventvo
