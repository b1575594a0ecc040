#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eventvo/event_io.hpp"

namespace eventvo {

enum class AlignmentMode { kRigid, kRigidScale };

// Parses "rigid" or "rigid+scale" (also "sim3"); throws kValidation.
AlignmentMode parse_alignment_mode(const std::string& text);

struct MatchedPair {
  std::size_t estimate;
  std::size_t ground_truth;
};

// Nearest ground-truth timestamp for every estimate, kept when within
// max_dt seconds.
std::vector<MatchedPair> match_timestamps(std::span<const StampedPose> estimate,
                                          std::span<const StampedPose> ground_truth,
                                          double max_dt = 0.01);

struct Alignment {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double rms_residual = 0.0;  // metres, after alignment
  std::size_t matches = 0;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }
};

// Least-squares alignment of estimated positions onto ground truth. Throws
// kPrecondition with fewer than 3 matches.
Alignment align_trajectories(std::span<const StampedPose> estimate,
                             std::span<const StampedPose> ground_truth,
                             AlignmentMode mode, double max_dt = 0.01);

struct ErrorRow {
  double t = 0.0;
  double longitudinal = 0.0;  // signed, along the ground-truth heading
  double lateral = 0.0;       // signed, horizontal perpendicular
  double planar = 0.0;
  bool heading_defined = true;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  double mean_longitudinal = 0.0;  // mean absolute value
  double mean_lateral = 0.0;
  double mean_planar = 0.0;
  double path_length = 0.0;        // ground truth over the evaluated interval
  double relative_error = 0.0;     // percent: mean planar / path length
  Alignment alignment;
};

struct ErrorOptions {
  double max_dt = 0.01;
  double heading_window = 0.2;  // seconds, centred finite difference
  int vertical_axis = 2;        // world axis excluded from planar errors
};

// Errors of already-aligned estimated positions against ground truth.
ErrorReport compute_position_errors(std::span<const StampedPose> aligned,
                                    std::span<const StampedPose> ground_truth,
                                    const ErrorOptions& options = {});

// Aligns, then computes errors; the alignment is stored in the report.
ErrorReport evaluate_trajectory(std::span<const StampedPose> estimate,
                                std::span<const StampedPose> ground_truth,
                                AlignmentMode mode,
                                const ErrorOptions& options = {});

std::vector<StampedPose> apply_alignment(std::span<const StampedPose> poses,
                                         const Alignment& alignment);

// "t,longitudinal,lateral,planar" rows.
void write_error_csv(const std::filesystem::path& path, const ErrorReport& report);
// Whitespace columns "t planar longitudinal lateral" for gnuplot.
void write_error_dat(const std::filesystem::path& path, const ErrorReport& report);
// Summary rows "Average error" and "Relative error" under
// Longitudinal / Lateral / Planar headers.
std::string format_error_table(const ErrorReport& report);

}  // namespace eventvo
