#pragma once

#include <span>

#include <Eigen/Core>

namespace eventvo {

// Depths along x1 (frame 1) and x2 (frame 2) for the relative pose
// X2 = R X1 + t, from the least-squares solution of Z1 R x1 - Z2 x2 = -t.
struct Triangulation {
  double z1 = 0.0;
  double z2 = 0.0;
  double residual = 0.0;  // ||Z2 x2 - Z1 R x1 - t||
  double parallax = 0.0;  // angle between R x1 and x2, radians
};

inline constexpr double kMinParallax = 1e-4;

// No validity checks; z may be negative or meaningless at zero parallax.
Triangulation solve_depths(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2,
                           const Eigen::Matrix3d& rotation,
                           const Eigen::Vector3d& translation);

// Bearings must have third coordinate 1. Throws kDegenerate for parallax
// below kMinParallax or a zero baseline, kGeometry for a non-positive depth.
Triangulation triangulate(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2,
                          const Eigen::Matrix3d& rotation,
                          const Eigen::Vector3d& translation);

// Essential matrix with x2^T E x1 = 0 from >= 8 normalized bearing pairs,
// projected to singular values (s, s, 0), Frobenius norm 1 and the first
// largest-magnitude entry (row-major) positive. Throws kPrecondition for
// fewer than 8 pairs or mismatched sizes, kDegenerate when the constraint
// matrix has rank < 8.
Eigen::Matrix3d eight_point(std::span<const Eigen::Vector3d> x1,
                            std::span<const Eigen::Vector3d> x2);

struct RelativePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // unit norm
  int inliers = 0;  // pairs in front of both cameras
};

// Picks the candidate with the most pairs in front of both cameras; throws
// kGeometry unless it holds a strict majority.
RelativePose decompose_essential(const Eigen::Matrix3d& essential,
                                 std::span<const Eigen::Vector3d> x1,
                                 std::span<const Eigen::Vector3d> x2);

}  // namespace eventvo
