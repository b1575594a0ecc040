#include "eventvo/geometry.hpp"

#include <cmath>
#include <numbers>

#include "eventvo/error.hpp"

namespace eventvo {

namespace {
constexpr const char* kModule = "geometry";
constexpr double kSmallAngle = 1e-8;
}  // namespace

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Vector3d CameraIntrinsics::bearing(const Eigen::Vector2d& pixel) const {
  return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0};
}

bool CameraIntrinsics::contains(const Eigen::Vector2d& pixel,
                                double margin) const {
  return pixel.x() >= margin && pixel.y() >= margin &&
         pixel.x() <= width - 1 - margin && pixel.y() <= height - 1 - margin;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::kValidation, kModule, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kValidation, kModule, "sensor size must be positive");
  }
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw Error(ErrorCode::kValidation, kModule,
                "principal point outside the sensor");
  }
}

PoseSE3::PoseSE3()
    : rotation_(Eigen::Matrix3d::Identity()),
      translation_(Eigen::Vector3d::Zero()) {}

PoseSE3::PoseSE3(const Eigen::Matrix3d& rotation,
                 const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {}

PoseSE3::PoseSE3(const Eigen::Quaterniond& rotation,
                 const Eigen::Vector3d& translation)
    : rotation_(rotation.normalized().toRotationMatrix()),
      translation_(translation) {}

Eigen::Quaterniond PoseSE3::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

PoseSE3 PoseSE3::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return PoseSE3(rt, -rt * translation_);
}

PoseSE3 PoseSE3::operator*(const PoseSE3& other) const {
  return PoseSE3(rotation_ * other.rotation_,
                 rotation_ * other.translation_ + translation_);
}

Eigen::Vector3d PoseSE3::operator*(const Eigen::Vector3d& point) const {
  return rotation_ * point + translation_;
}

double PoseSE3::orthonormality_error() const {
  return (rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity())
      .norm();
}

Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = hat(omega);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const Eigen::Vector3d v = q.vec();
  const double s = v.norm();
  if (s < kSmallAngle) {
    // atan2(s, w) / s -> 1 / w for small s.
    return 2.0 * v / q.w();
  }
  const double theta = 2.0 * std::atan2(s, q.w());
  return theta * v / s;
}

namespace {

// Left Jacobian V of SO(3) such that t = V * rho.
Eigen::Matrix3d left_jacobian(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = hat(omega);
  if (theta < 1e-5) {
    return Eigen::Matrix3d::Identity() + 0.5 * w + w * w / 6.0;
  }
  const double t2 = theta * theta;
  const double b = (1.0 - std::cos(theta)) / t2;
  const double c = (theta - std::sin(theta)) / (t2 * theta);
  return Eigen::Matrix3d::Identity() + b * w + c * w * w;
}

Eigen::Matrix3d left_jacobian_inverse(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = hat(omega);
  if (theta < 1e-5) {
    return Eigen::Matrix3d::Identity() - 0.5 * w + w * w / 12.0;
  }
  const double half = 0.5 * theta;
  const double coeff =
      (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Eigen::Matrix3d::Identity() - 0.5 * w + coeff * w * w;
}

}  // namespace

PoseSE3 se3_exp(const Twist& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d omega = xi.tail<3>();
  return PoseSE3(so3_exp(omega), left_jacobian(omega) * rho);
}

Twist se3_log(const PoseSE3& pose) {
  const double angle = rotation_angle(pose.rotation());
  if (angle >= std::numbers::pi - 1e-6) {
    throw Error(ErrorCode::kGeometry, kModule,
                "rotation angle too close to pi for the se(3) logarithm");
  }
  const Eigen::Vector3d omega = so3_log(pose.rotation());
  Twist xi;
  xi.head<3>() = left_jacobian_inverse(omega) * pose.translation();
  xi.tail<3>() = omega;
  return xi;
}

std::optional<Eigen::Vector2d> try_project(const Eigen::Vector3d& point,
                                           const CameraIntrinsics& camera) {
  if (!(point.z() > 0.0)) return std::nullopt;
  const double inv_z = 1.0 / point.z();
  return Eigen::Vector2d(camera.fx * point.x() * inv_z + camera.cx,
                         camera.fy * point.y() * inv_z + camera.cy);
}

Eigen::Vector2d project(const Eigen::Vector3d& point,
                        const CameraIntrinsics& camera) {
  auto px = try_project(point, camera);
  if (!px) {
    throw Error(ErrorCode::kGeometry, kModule, "point is behind the camera");
  }
  return *px;
}

double rotation_angle(const Eigen::Matrix3d& rotation) {
  return so3_log(rotation).norm();
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

PoseDistance pose_distance(const PoseSE3& a, const PoseSE3& b) {
  return {rotation_angle(a.rotation().transpose() * b.rotation()),
          (a.translation() - b.translation()).norm()};
}

}  // namespace eventvo
