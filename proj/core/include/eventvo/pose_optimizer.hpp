#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eventvo/geometry.hpp"

namespace eventvo {

/// A tracked pixel paired with its map point (world frame).
struct Observation {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  double weight = 1.0;  // prior weight, multiplied by the robust weight
};

using Jacobian26 = Eigen::Matrix<double, 2, 6>;

// e = u - project(T P) with T the world-to-camera pose. Empty when the
// transformed point is not in front of the camera.
std::optional<Eigen::Vector2d> reprojection_error(const PoseSE3& t_cw,
                                                  const Observation& obs,
                                                  const CameraIntrinsics& k);
std::optional<Eigen::Vector2d> reprojection_error(const Twist& xi,
                                                  const Observation& obs,
                                                  const CameraIntrinsics& k);

// de/d(delta) for the left increment exp(delta) * T, twist order
// (translation, rotation).
std::optional<Jacobian26> reprojection_jacobian(const PoseSE3& t_cw,
                                                const Observation& obs,
                                                const CameraIntrinsics& k);
std::optional<Jacobian26> reprojection_jacobian(const Twist& xi,
                                                const Observation& obs,
                                                const CameraIntrinsics& k);

// Huber weight: 1 inside delta, delta / ||e|| outside.
double compute_weight(const Eigen::Vector2d& e, double delta);
// Huber cost whose IRLS weight is compute_weight: r^2 inside delta,
// 2 delta r - delta^2 outside.
double huber_cost(double r, double delta);

struct OptimizerOptions {
  int max_iterations = 20;
  double tolerance = 1e-8;  // on ||delta||
  double huber_delta = 1.5;
  double initial_lambda = 1e-4;
  double max_condition = 1e12;
};

struct OptimizerReport {
  int iterations = 0;
  double initial_error = 0.0;  // weighted robust cost, pixels^2
  double final_error = 0.0;
  double step_norm = 0.0;
  bool converged = false;
  int valid_observations = 0;
  int invalid_observations = 0;  // behind the camera at the initial pose
  std::vector<double> accepted_errors;  // initial error then every accepted step
};

struct OptimizerResult {
  PoseSE3 pose;  // world-to-camera
  OptimizerReport report;
};

// Levenberg-damped, iteratively reweighted Gauss-Newton on the world-to-
// camera pose. Throws kUnderdetermined with fewer than 3 valid observations
// and kDegenerate when the normal matrix condition number exceeds
// max_condition.
OptimizerResult optimize_pose(const PoseSE3& init,
                              std::span<const Observation> observations,
                              const CameraIntrinsics& k,
                              const OptimizerOptions& options = {});

// Twist-parameterized form of the above.
std::pair<Twist, OptimizerReport> optimize_pose(
    const Twist& xi_init, std::span<const Observation> observations,
    const CameraIntrinsics& k, const OptimizerOptions& options = {});

}  // namespace eventvo
