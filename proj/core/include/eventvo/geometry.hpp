#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace eventvo {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Tangent vector of SE(3): head(3) is the translational part, tail(3) the
// rotational part (axis-angle).
using Twist = Vector6d;

/// Pinhole intrinsics without distortion.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Eigen::Matrix3d matrix() const;
  // Normalized homogeneous bearing (third coordinate 1) of a pixel.
  Eigen::Vector3d bearing(const Eigen::Vector2d& pixel) const;
  bool contains(const Eigen::Vector2d& pixel, double margin = 0.0) const;
  // Throws Error(kValidation) unless fx, fy > 0 and the principal point lies
  // inside the sensor.
  void validate() const;
};

/// Rigid-body transform x' = R x + t.
class PoseSE3 {
 public:
  PoseSE3();
  PoseSE3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);
  PoseSE3(const Eigen::Quaterniond& rotation,
          const Eigen::Vector3d& translation);

  static PoseSE3 identity() { return PoseSE3(); }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Quaterniond quaternion() const;

  PoseSE3 inverse() const;
  PoseSE3 operator*(const PoseSE3& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const;

  // Orthonormality residual ||R^T R - I|| (Frobenius).
  double orthonormality_error() const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

Eigen::Matrix3d hat(const Eigen::Vector3d& v);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);
Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation);

PoseSE3 se3_exp(const Twist& xi);
// Throws Error(kGeometry) when the rotation angle is within 1e-6 of pi,
// where the logarithm leaves its chart.
Twist se3_log(const PoseSE3& pose);

// Pixel projection of a camera-frame point. Throws Error(kGeometry) when the
// point is not in front of the camera.
Eigen::Vector2d project(const Eigen::Vector3d& point,
                        const CameraIntrinsics& camera);
std::optional<Eigen::Vector2d> try_project(const Eigen::Vector3d& point,
                                           const CameraIntrinsics& camera);

double rotation_angle(const Eigen::Matrix3d& rotation);
double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// Pose difference as (rotation angle [rad], translation distance).
struct PoseDistance {
  double rotation = 0.0;
  double translation = 0.0;
};
PoseDistance pose_distance(const PoseSE3& a, const PoseSE3& b);

}  // namespace eventvo
