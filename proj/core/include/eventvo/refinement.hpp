#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eventvo/geometry.hpp"

namespace eventvo {

// One sighting of a 3D point.
struct PointObservation {
  PoseSE3 t_cw;  // world-to-camera
  Eigen::Vector2d pixel;
};

// Multi-view triangulation: Gauss-Newton on the summed squared pixel error,
// started from `init`. Returns nullopt with fewer than two observations, a
// point behind any camera, or a singular normal matrix.
std::optional<Eigen::Vector3d> refine_point(const Eigen::Vector3d& init,
                                            std::span<const PointObservation> obs,
                                            const CameraIntrinsics& k,
                                            int iterations = 10);

}  // namespace eventvo

namespace eventvo {

struct BundleObservation {
  int camera = 0;  // index into BundleProblem::poses
  int point = 0;   // index into BundleProblem::points
  Eigen::Vector2d pixel;
};

struct BundleProblem {
  std::vector<PoseSE3> poses;  // world-to-camera
  std::vector<bool> fixed;     // per pose; at least one should be fixed
  std::vector<Eigen::Vector3d> points;
  std::vector<BundleObservation> observations;
};

struct BundleOptions {
  int max_iterations = 10;
  double huber_delta = 1.5;  // pixels
  double initial_lambda = 1e-4;
};

struct BundleReport {
  int iterations = 0;
  double initial_cost = 0.0;  // summed Huber cost, pixels^2
  double final_cost = 0.0;
};

// Levenberg-Marquardt over all free poses and points with the point blocks
// eliminated through the Schur complement. Observations of points behind
// their camera are ignored for that iteration. The problem is updated in
// place; the cost never increases.
BundleReport bundle_adjust(BundleProblem& problem, const CameraIntrinsics& k,
                           const BundleOptions& options = {});

}  // namespace eventvo
