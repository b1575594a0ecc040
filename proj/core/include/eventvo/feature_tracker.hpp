#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "eventvo/image.hpp"

namespace eventvo {

struct TrackerOptions {
  int patch_size = 15;        // odd
  int max_iterations = 30;    // per stage
  double loss_ratio = 0.8;    // mean |residual| / mean |template|
  double coarse_sigma = 2.0;  // blur for the translation-only stage
  double fine_sigma = 1.0;    // blur for the affine stage
  double step_tolerance = 1e-3;
};

struct TrackResult {
  bool tracked = false;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Matrix2d affine = Eigen::Matrix2d::Identity();
  double residual = 0.0;  // mean absolute residual after alignment
};

// Inverse-compositional alignment of the patch around each previous position
// into `cur`: translation on a coarse blur, then a full affine warp on a fine
// blur. `predicted` optionally holds per-feature starting displacements; a
// prediction or result outside the sensor marks the feature lost.
std::vector<TrackResult> track_features(
    const Image& prev, const Image& cur,
    std::span<const Eigen::Vector2d> positions,
    const TrackerOptions& options = {},
    std::span<const Eigen::Vector2d> predicted = {});

}  // namespace eventvo
