#include "eventvo/event_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <string_view>

#include "eventvo/config.hpp"
#include "eventvo/error.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "event_io";

// Splits on blanks; returns false for blank/comment lines.
bool tokenize(std::string_view line, std::vector<std::string_view>& tokens) {
  tokens.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r' || line[i] == ',')) {
      ++i;
    }
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r' && line[i] != ',') {
      ++i;
    }
    tokens.push_back(line.substr(start, i - start));
  }
  if (tokens.empty()) return false;
  return tokens.front().front() != '#';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, kModule, "cannot write " + path.string());
  }
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, kModule, "cannot open " + path.string());
  }
  return in;
}

}  // namespace

EventStream parse_event_stream(std::istream& in, int width, int height,
                               const std::string& source) {
  EventStream stream;
  std::string raw;
  std::vector<std::string_view> tokens;
  std::size_t line_no = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, raw)) {
    ++line_no;
    if (!tokenize(raw, tokens)) continue;
    if (tokens.size() != 4) {
      throw Error(ErrorCode::kParse, kModule,
                  source + ": expected 't x y p', got " +
                      std::to_string(tokens.size()) + " fields",
                  line_no);
    }
    Event e;
    long long x = 0, y = 0, p = 0;
    if (!parse_double(tokens[0], e.t) || !parse_int(tokens[1], x) ||
        !parse_int(tokens[2], y) || !parse_int(tokens[3], p)) {
      throw Error(ErrorCode::kParse, kModule, source + ": malformed event",
                  line_no);
    }
    if (p != 0 && p != 1) {
      throw Error(ErrorCode::kParse, kModule,
                  source + ": polarity must be 0 or 1", line_no);
    }
    if (e.t < 0.0) {
      throw Error(ErrorCode::kValidation, kModule,
                  source + ": negative timestamp", line_no);
    }
    if (x < 0 || y < 0 || x >= width || y >= height) {
      throw Error(ErrorCode::kValidation, kModule,
                  source + ": pixel (" + std::to_string(x) + ", " +
                      std::to_string(y) + ") outside " + std::to_string(width) +
                      "x" + std::to_string(height) + " sensor",
                  line_no);
    }
    e.x = static_cast<int>(x);
    e.y = static_cast<int>(y);
    e.polarity = p == 1 ? 1 : -1;
    if (e.t < last_t) stream.non_monotonic_lines.push_back(line_no);
    last_t = e.t;
    stream.events.push_back(e);
  }
  return stream;
}

EventStream load_event_stream(const std::filesystem::path& path, int width,
                              int height) {
  auto in = open_for_read(path);
  return parse_event_stream(in, width, height, path.string());
}

void write_event_stream(const std::filesystem::path& path,
                        std::span<const Event> events) {
  auto out = open_for_write(path);
  char buf[96];
  for (const Event& e : events) {
    std::snprintf(buf, sizeof(buf), "%.6f %d %d %d\n", e.t, e.x, e.y,
                  e.polarity > 0 ? 1 : 0);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::kIo, kModule, "write failed: " + path.string());
}

TrackTable parse_feature_tracks(std::istream& in, const std::string& source) {
  TrackTable tracks;
  std::string raw;
  std::vector<std::string_view> tokens;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!tokenize(raw, tokens)) continue;
    if (tokens.size() != 4) {
      throw Error(ErrorCode::kParse, kModule,
                  source + ": expected 'frame_id feature_id u v'", line_no);
    }
    long long frame = 0, feature = 0;
    double u = 0.0, v = 0.0;
    if (!parse_int(tokens[0], frame) || !parse_int(tokens[1], feature) ||
        !parse_double(tokens[2], u) || !parse_double(tokens[3], v)) {
      throw Error(ErrorCode::kParse, kModule, source + ": non-numeric token",
                  line_no);
    }
    if (frame < 0 || feature < 0) {
      throw Error(ErrorCode::kValidation, kModule,
                  source + ": negative identifier", line_no);
    }
    auto& frame_obs = tracks[static_cast<int>(frame)];
    if (!frame_obs.emplace(static_cast<int>(feature), Eigen::Vector2d(u, v))
             .second) {
      throw Error(ErrorCode::kValidation, kModule,
                  source + ": duplicate (frame " + std::to_string(frame) +
                      ", feature " + std::to_string(feature) + ")",
                  line_no);
    }
  }
  return tracks;
}

TrackTable load_feature_tracks(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return parse_feature_tracks(in, path.string());
}

void write_feature_tracks(const std::filesystem::path& path,
                          const TrackTable& tracks) {
  auto out = open_for_write(path);
  char buf[128];
  for (const auto& [frame, observations] : tracks) {
    for (const auto& [id, px] : observations) {
      std::snprintf(buf, sizeof(buf), "%d %d %.6f %.6f\n", frame, id, px.x(),
                    px.y());
      out << buf;
    }
  }
  if (!out) throw Error(ErrorCode::kIo, kModule, "write failed: " + path.string());
}

std::string format_trajectory_line(const StampedPose& sp) {
  const Eigen::Quaterniond q = sp.pose.quaternion();
  const Eigen::Vector3d& t = sp.pose.translation();
  // %.9g prints -0 for tiny negatives; normalize so identity is "0".
  auto clean = [](double v) { return v == 0.0 ? 0.0 : v; };
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.9f %.9g %.9g %.9g %.9g %.9g %.9g %.9g",
                sp.t, clean(t.x()), clean(t.y()), clean(t.z()), clean(q.x()),
                clean(q.y()), clean(q.z()), clean(q.w()));
  return buf;
}

void write_trajectory(const std::filesystem::path& path,
                      std::span<const StampedPose> poses) {
  for (std::size_t i = 1; i < poses.size(); ++i) {
    if (!(poses[i].t > poses[i - 1].t)) {
      throw Error(ErrorCode::kPrecondition, kModule,
                  "trajectory timestamps must be strictly increasing (index " +
                      std::to_string(i) + ")");
    }
  }
  auto out = open_for_write(path);
  for (const auto& p : poses) out << format_trajectory_line(p) << '\n';
  if (!out) throw Error(ErrorCode::kIo, kModule, "write failed: " + path.string());
}

std::vector<StampedPose> parse_trajectory(std::istream& in,
                                          const std::string& source) {
  std::vector<StampedPose> poses;
  std::string raw;
  std::vector<std::string_view> tokens;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!tokenize(raw, tokens)) continue;
    if (tokens.size() != 8) {
      throw Error(ErrorCode::kParse, kModule,
                  source + ": expected 't tx ty tz qx qy qz qw'", line_no);
    }
    double v[8];
    for (int i = 0; i < 8; ++i) {
      if (!parse_double(tokens[i], v[i])) {
        throw Error(ErrorCode::kParse, kModule, source + ": non-numeric token",
                    line_no);
      }
    }
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (std::abs(q.norm() - 1.0) > 1e-3) {
      throw Error(ErrorCode::kValidation, kModule,
                  source + ": quaternion is not unit-norm", line_no);
    }
    poses.push_back({v[0], PoseSE3(q, Eigen::Vector3d(v[1], v[2], v[3]))});
  }
  return poses;
}

std::vector<StampedPose> load_trajectory(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return parse_trajectory(in, path.string());
}

}  // namespace eventvo
