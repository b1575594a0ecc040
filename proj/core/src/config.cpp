#include "eventvo/config.hpp"

#include <charconv>
#include <cmath>
#include <locale>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "eventvo/error.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "event_io";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "width", "height", "fx", "fy", "cx", "cy",
      "frame_interval", "flow_window", "max_features", "min_distance",
      "patch_size", "track_max_iterations", "track_loss_ratio",
      "keyframe_period", "refill_threshold",
      "gn_max_iterations", "gn_step_tolerance", "huber_delta",
      "depth_min", "depth_max", "depth_convergence_ratio",
      "depth_outlier_ratio", "depth_min_parallax",
      "ba_window", "ba_iterations",
      "queue_capacity", "min_tracked_features",
      "bootstrap_min_disparity", "bootstrap_baseline", "seed"};
  return keys;
}

}  // namespace

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(std::string_view token, long long& out) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& source) {
  KeyValueFile file;
  file.source_ = source;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParse, kModule,
                  source + ": expected 'key = value'", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw Error(ErrorCode::kParse, kModule, source + ": empty key", line_no);
    }
    if (file.values_.count(key) != 0) {
      throw Error(ErrorCode::kParse, kModule,
                  source + ": duplicate key '" + key + "'", line_no);
    }
    file.values_[key] = value;
    file.lines_[key] = line_no;
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, kModule, "cannot open " + path.string());
  }
  return parse(in, path.string());
}

std::size_t KeyValueFile::line_of(const std::string& key) const {
  auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

double KeyValueFile::require_double(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCode::kConfig, kModule,
                source_ + ": missing config key '" + key + "'");
  }
  double v = 0.0;
  if (!parse_double(it->second, v)) {
    throw Error(ErrorCode::kParse, kModule,
                source_ + ": key '" + key + "' is not a number", line_of(key));
  }
  return v;
}

int KeyValueFile::require_int(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCode::kConfig, kModule,
                source_ + ": missing config key '" + key + "'");
  }
  long long v = 0;
  if (!parse_int(it->second, v)) {
    throw Error(ErrorCode::kParse, kModule,
                source_ + ": key '" + key + "' is not an integer", line_of(key));
  }
  return static_cast<int>(v);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  return has(key) ? require_int(key) : fallback;
}

std::uint64_t KeyValueFile::get_uint64(const std::string& key,
                                       std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, kModule,
                source_ + ": key '" + key + "' is not an unsigned integer",
                line_of(key));
  }
  return v;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::kParse, kModule,
              source_ + ": key '" + key + "' is not a boolean", line_of(key));
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

CameraIntrinsics Config::camera() const {
  return CameraIntrinsics{fx, fy, cx, cy, width, height};
}

void Config::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(ErrorCode::kConfig, kModule, "key '" + key + "' " + why);
  };
  if (width <= 0) fail("width", "must be positive");
  if (height <= 0) fail("height", "must be positive");
  if (!(fx > 0.0)) fail("fx", "must be positive");
  if (!(fy > 0.0)) fail("fy", "must be positive");
  if (cx < 0.0 || cx >= width) fail("cx", "must lie inside the sensor");
  if (cy < 0.0 || cy >= height) fail("cy", "must lie inside the sensor");
  if (!(frame_interval > 0.0)) fail("frame_interval", "must be positive");
  if (flow_window < 1) fail("flow_window", "must be >= 1");
  if (max_features <= 0) fail("max_features", "must be positive");
  if (!(min_distance > 0.0)) fail("min_distance", "must be positive");
  if (patch_size < 3 || patch_size % 2 == 0) {
    fail("patch_size", "must be an odd number >= 3");
  }
  if (track_max_iterations <= 0) fail("track_max_iterations", "must be positive");
  if (!(track_loss_ratio > 0.0)) fail("track_loss_ratio", "must be positive");
  if (keyframe_period <= 0) fail("keyframe_period", "must be positive");
  if (refill_threshold < 0) fail("refill_threshold", "must be non-negative");
  if (gn_max_iterations <= 0) fail("gn_max_iterations", "must be positive");
  if (!(gn_step_tolerance > 0.0)) fail("gn_step_tolerance", "must be positive");
  if (!(huber_delta > 0.0)) fail("huber_delta", "must be positive");
  if (!(depth_min > 0.0)) fail("depth_min", "must be positive");
  if (!(depth_max > depth_min)) fail("depth_max", "must exceed depth_min");
  if (!(depth_convergence_ratio > 0.0)) {
    fail("depth_convergence_ratio", "must be positive");
  }
  if (depth_outlier_ratio < 0.0 || depth_outlier_ratio >= 1.0) {
    fail("depth_outlier_ratio", "must lie in [0, 1)");
  }
  if (depth_min_parallax < 0.0) fail("depth_min_parallax", "must be non-negative");
  if (ba_window < 0 || ba_window == 1 || ba_window == 2) {
    fail("ba_window", "must be 0 (off) or at least 3");
  }
  if (ba_iterations <= 0) fail("ba_iterations", "must be positive");
  if (queue_capacity <= 0) fail("queue_capacity", "must be positive");
  if (min_tracked_features < 3) fail("min_tracked_features", "must be >= 3");
  if (bootstrap_min_disparity < 0.0) {
    fail("bootstrap_min_disparity", "must be non-negative");
  }
  if (!(bootstrap_baseline > 0.0)) fail("bootstrap_baseline", "must be positive");
}

std::string format_number(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, r.ptr);
}

Config config_from(const KeyValueFile& file) {
  for (const auto& [key, value] : file.values()) {
    if (known_keys().count(key) == 0) {
      throw Error(ErrorCode::kConfig, kModule,
                  file.source() + ": unknown config key '" + key + "'");
    }
  }
  Config c;
  c.width = file.require_int("width");
  c.height = file.require_int("height");
  c.fx = file.require_double("fx");
  c.fy = file.require_double("fy");
  c.cx = file.require_double("cx");
  c.cy = file.require_double("cy");
  c.frame_interval = file.get_double("frame_interval", c.frame_interval);
  c.flow_window = file.get_int("flow_window", c.flow_window);
  c.max_features = file.get_int("max_features", c.max_features);
  c.min_distance = file.get_double("min_distance", c.min_distance);
  c.patch_size = file.get_int("patch_size", c.patch_size);
  c.track_max_iterations =
      file.get_int("track_max_iterations", c.track_max_iterations);
  c.track_loss_ratio = file.get_double("track_loss_ratio", c.track_loss_ratio);
  c.keyframe_period = file.get_int("keyframe_period", c.keyframe_period);
  c.refill_threshold = file.get_int("refill_threshold", c.refill_threshold);
  c.gn_max_iterations = file.get_int("gn_max_iterations", c.gn_max_iterations);
  c.gn_step_tolerance =
      file.get_double("gn_step_tolerance", c.gn_step_tolerance);
  c.huber_delta = file.get_double("huber_delta", c.huber_delta);
  c.depth_min = file.get_double("depth_min", c.depth_min);
  c.depth_max = file.get_double("depth_max", c.depth_max);
  c.depth_convergence_ratio =
      file.get_double("depth_convergence_ratio", c.depth_convergence_ratio);
  c.depth_outlier_ratio =
      file.get_double("depth_outlier_ratio", c.depth_outlier_ratio);
  c.depth_min_parallax =
      file.get_double("depth_min_parallax", c.depth_min_parallax);
  c.ba_window = file.get_int("ba_window", c.ba_window);
  c.ba_iterations = file.get_int("ba_iterations", c.ba_iterations);
  c.queue_capacity = file.get_int("queue_capacity", c.queue_capacity);
  c.min_tracked_features =
      file.get_int("min_tracked_features", c.min_tracked_features);
  c.bootstrap_min_disparity =
      file.get_double("bootstrap_min_disparity", c.bootstrap_min_disparity);
  c.bootstrap_baseline =
      file.get_double("bootstrap_baseline", c.bootstrap_baseline);
  c.seed = file.get_uint64("seed", c.seed);
  c.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  return config_from(KeyValueFile::load(path));
}

Config parse_config(std::istream& in, const std::string& source) {
  return config_from(KeyValueFile::parse(in, source));
}

std::string to_config_text(const Config& c) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "# sensor\n"
     << "width = " << c.width << "\nheight = " << c.height << '\n'
     << "fx = " << format_number(c.fx) << "\nfy = " << format_number(c.fy) << '\n'
     << "cx = " << format_number(c.cx) << "\ncy = " << format_number(c.cy) << '\n'
     << "# frame building\n"
     << "frame_interval = " << format_number(c.frame_interval) << '\n'
     << "flow_window = " << c.flow_window << '\n'
     << "max_features = " << c.max_features << '\n'
     << "min_distance = " << format_number(c.min_distance) << '\n'
     << "patch_size = " << c.patch_size << '\n'
     << "track_max_iterations = " << c.track_max_iterations << '\n'
     << "track_loss_ratio = " << format_number(c.track_loss_ratio) << '\n'
     << "keyframe_period = " << c.keyframe_period << '\n'
     << "refill_threshold = " << c.refill_threshold << '\n'
     << "# pose optimization\n"
     << "gn_max_iterations = " << c.gn_max_iterations << '\n'
     << "gn_step_tolerance = " << format_number(c.gn_step_tolerance) << '\n'
     << "huber_delta = " << format_number(c.huber_delta) << '\n'
     << "# depth filter\n"
     << "depth_min = " << format_number(c.depth_min) << '\n'
     << "depth_max = " << format_number(c.depth_max) << '\n'
     << "depth_convergence_ratio = " << format_number(c.depth_convergence_ratio) << '\n'
     << "depth_outlier_ratio = " << format_number(c.depth_outlier_ratio) << '\n'
     << "depth_min_parallax = " << format_number(c.depth_min_parallax) << '\n'
     << "# window refinement\n"
     << "ba_window = " << c.ba_window << '\n'
     << "ba_iterations = " << c.ba_iterations << '\n'
     << "# pipeline\n"
     << "queue_capacity = " << c.queue_capacity << '\n'
     << "min_tracked_features = " << c.min_tracked_features << '\n'
     << "bootstrap_min_disparity = " << format_number(c.bootstrap_min_disparity) << '\n'
     << "bootstrap_baseline = " << format_number(c.bootstrap_baseline) << '\n'
     << "seed = " << c.seed << '\n';
  return os.str();
}

}  // namespace eventvo
