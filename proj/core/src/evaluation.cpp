#include "eventvo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Geometry>

#include "eventvo/error.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "synth_eval";

std::size_t nearest_index(std::span<const StampedPose> poses, double t) {
  auto it = std::lower_bound(poses.begin(), poses.end(), t,
                             [](const StampedPose& p, double v) { return p.t < v; });
  if (it == poses.end()) return poses.size() - 1;
  const std::size_t i = static_cast<std::size_t>(it - poses.begin());
  if (i > 0 && std::abs(poses[i - 1].t - t) <= std::abs(poses[i].t - t)) return i - 1;
  return i;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, kModule, "cannot write " + path.string());
  return out;
}

}  // namespace

AlignmentMode parse_alignment_mode(const std::string& text) {
  if (text == "rigid" || text == "se3") return AlignmentMode::kRigid;
  if (text == "rigid+scale" || text == "sim3") return AlignmentMode::kRigidScale;
  throw Error(ErrorCode::kValidation, kModule,
              "alignment mode must be 'rigid' or 'rigid+scale', got '" + text + "'");
}

std::vector<MatchedPair> match_timestamps(std::span<const StampedPose> estimate,
                                          std::span<const StampedPose> ground_truth,
                                          double max_dt) {
  std::vector<MatchedPair> out;
  if (ground_truth.empty()) return out;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const std::size_t j = nearest_index(ground_truth, estimate[i].t);
    if (std::abs(ground_truth[j].t - estimate[i].t) <= max_dt) out.push_back({i, j});
  }
  return out;
}

Alignment align_trajectories(std::span<const StampedPose> estimate,
                             std::span<const StampedPose> ground_truth,
                             AlignmentMode mode, double max_dt) {
  const auto matches = match_timestamps(estimate, ground_truth, max_dt);
  if (matches.size() < 3) {
    throw Error(ErrorCode::kPrecondition, kModule,
                "alignment needs at least 3 timestamp matches within " +
                    std::to_string(max_dt) + " s, found " +
                    std::to_string(matches.size()));
  }
  Eigen::Matrix3Xd src(3, matches.size());
  Eigen::Matrix3Xd dst(3, matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    src.col(i) = estimate[matches[i].estimate].pose.translation();
    dst.col(i) = ground_truth[matches[i].ground_truth].pose.translation();
  }
  const Eigen::Matrix4d t =
      Eigen::umeyama(src, dst, mode == AlignmentMode::kRigidScale);
  Alignment a;
  a.matches = matches.size();
  const Eigen::Matrix3d sr = t.topLeftCorner<3, 3>();
  a.scale = mode == AlignmentMode::kRigidScale ? std::cbrt(sr.determinant()) : 1.0;
  a.rotation = sr / a.scale;
  a.translation = t.topRightCorner<3, 1>();
  double sq = 0.0;
  for (Eigen::Index i = 0; i < src.cols(); ++i) {
    sq += (a.apply(src.col(i)) - dst.col(i)).squaredNorm();
  }
  a.rms_residual = std::sqrt(sq / static_cast<double>(src.cols()));
  return a;
}

std::vector<StampedPose> apply_alignment(std::span<const StampedPose> poses,
                                         const Alignment& a) {
  std::vector<StampedPose> out;
  out.reserve(poses.size());
  for (const auto& p : poses) {
    out.push_back({p.t, PoseSE3(a.rotation * p.pose.rotation(),
                                a.apply(p.pose.translation()))});
  }
  return out;
}

ErrorReport compute_position_errors(std::span<const StampedPose> aligned,
                                    std::span<const StampedPose> ground_truth,
                                    const ErrorOptions& options) {
  if (options.vertical_axis < 0 || options.vertical_axis > 2) {
    throw Error(ErrorCode::kPrecondition, kModule, "vertical axis must be 0, 1 or 2");
  }
  const auto matches = match_timestamps(aligned, ground_truth, options.max_dt);
  if (matches.empty()) {
    throw Error(ErrorCode::kPrecondition, kModule,
                "no estimate timestamp matches the ground truth");
  }
  const int up = options.vertical_axis;
  auto horizontal = [up](Eigen::Vector3d v) {
    v[up] = 0.0;
    return v;
  };
  Eigen::Vector3d vertical = Eigen::Vector3d::Zero();
  vertical[up] = 1.0;

  ErrorReport report;
  double sum_lon = 0.0, sum_lat = 0.0, sum_planar = 0.0;
  int split = 0;
  for (const auto& m : matches) {
    const double t = aligned[m.estimate].t;
    const Eigen::Vector3d diff = horizontal(aligned[m.estimate].pose.translation() -
                                            ground_truth[m.ground_truth].pose.translation());
    const std::size_t lo = nearest_index(ground_truth, t - 0.5 * options.heading_window);
    const std::size_t hi = nearest_index(ground_truth, t + 0.5 * options.heading_window);
    const Eigen::Vector3d motion = horizontal(ground_truth[hi].pose.translation() -
                                              ground_truth[lo].pose.translation());
    ErrorRow row;
    row.t = t;
    if (hi > lo && motion.norm() > 1e-9) {
      const Eigen::Vector3d along = motion.normalized();
      const Eigen::Vector3d across = vertical.cross(along);
      row.longitudinal = diff.dot(along);
      row.lateral = diff.dot(across);
      row.planar = std::hypot(row.longitudinal, row.lateral);
      sum_lon += std::abs(row.longitudinal);
      sum_lat += std::abs(row.lateral);
      ++split;
    } else {
      row.heading_defined = false;
      row.planar = diff.norm();
    }
    sum_planar += row.planar;
    report.rows.push_back(row);
  }
  report.mean_planar = sum_planar / static_cast<double>(matches.size());
  if (split > 0) {
    report.mean_longitudinal = sum_lon / split;
    report.mean_lateral = sum_lat / split;
  }
  const std::size_t first = matches.front().ground_truth;
  const std::size_t last = matches.back().ground_truth;
  for (std::size_t j = std::min(first, last); j < std::max(first, last); ++j) {
    report.path_length +=
        (ground_truth[j + 1].pose.translation() - ground_truth[j].pose.translation()).norm();
  }
  report.relative_error =
      report.path_length > 0.0 ? 100.0 * report.mean_planar / report.path_length : 0.0;
  return report;
}

ErrorReport evaluate_trajectory(std::span<const StampedPose> estimate,
                                std::span<const StampedPose> ground_truth,
                                AlignmentMode mode, const ErrorOptions& options) {
  const Alignment a = align_trajectories(estimate, ground_truth, mode, options.max_dt);
  const auto aligned = apply_alignment(estimate, a);
  ErrorReport report = compute_position_errors(aligned, ground_truth, options);
  report.alignment = a;
  return report;
}

void write_error_csv(const std::filesystem::path& path, const ErrorReport& report) {
  auto out = open_out(path);
  out << "t,longitudinal,lateral,planar\n";
  char buf[160];
  for (const auto& r : report.rows) {
    if (r.heading_defined) {
      std::snprintf(buf, sizeof(buf), "%.9f,%.9g,%.9g,%.9g\n", r.t, r.longitudinal,
                    r.lateral, r.planar);
    } else {
      std::snprintf(buf, sizeof(buf), "%.9f,,,%.9g\n", r.t, r.planar);
    }
    out << buf;
  }
}

void write_error_dat(const std::filesystem::path& path, const ErrorReport& report) {
  auto out = open_out(path);
  out << "# t planar longitudinal lateral\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f %.6f\n", r.t, r.planar,
                  r.heading_defined ? std::abs(r.longitudinal) : NAN,
                  r.heading_defined ? std::abs(r.lateral) : NAN);
    out << buf;
  }
}

std::string format_error_table(const ErrorReport& report) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-16s %-14s %-14s %s\n", "", "Longitudinal",
                "Lateral", "Planar");
  out += buf;
  char lon[32], lat[32], pl[32], rel[32];
  std::snprintf(lon, sizeof(lon), "%.3f m", report.mean_longitudinal);
  std::snprintf(lat, sizeof(lat), "%.3f m", report.mean_lateral);
  std::snprintf(pl, sizeof(pl), "%.3f m", report.mean_planar);
  std::snprintf(buf, sizeof(buf), "%-16s %-14s %-14s %s\n", "Average error", lon,
                lat, pl);
  out += buf;
  std::snprintf(rel, sizeof(rel), "%.4f%%", report.relative_error);
  std::snprintf(buf, sizeof(buf), "%-16s %-14s %-14s %s\n", "Relative error", "",
                "", rel);
  out += buf;
  std::snprintf(buf, sizeof(buf), "path length %.3f m, %zu samples, scale %.6f\n",
                report.path_length, report.rows.size(), report.alignment.scale);
  out += buf;
  return out;
}

}  // namespace eventvo
