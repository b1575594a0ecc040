#include "eventvo/two_view.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "eventvo/error.hpp"
#include "eventvo/geometry.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "geometry";

// Isotropic similarity taking the 2D points to zero mean and mean distance
// sqrt(2).
Eigen::Matrix3d normalizer(std::span<const Eigen::Vector3d> x) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : x) centroid += p.head<2>() / p.z();
  centroid /= static_cast<double>(x.size());
  double spread = 0.0;
  for (const auto& p : x) spread += (p.head<2>() / p.z() - centroid).norm();
  spread /= static_cast<double>(x.size());
  const double s = spread > 0.0 ? std::sqrt(2.0) / spread : 1.0;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * centroid.x(), 0.0, s, -s * centroid.y(), 0.0, 0.0, 1.0;
  return t;
}

}  // namespace

Triangulation solve_depths(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2,
                           const Eigen::Matrix3d& rotation,
                           const Eigen::Vector3d& translation) {
  Eigen::Matrix<double, 3, 2> a;
  a.col(0) = rotation * x1;
  a.col(1) = -x2;
  Triangulation out;
  out.parallax = angle_between(a.col(0), x2);
  const Eigen::Vector2d z = a.colPivHouseholderQr().solve(-translation);
  out.z1 = z.x();
  out.z2 = z.y();
  out.residual = (out.z2 * x2 - out.z1 * rotation * x1 - translation).norm();
  return out;
}

Triangulation triangulate(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2,
                          const Eigen::Matrix3d& rotation,
                          const Eigen::Vector3d& translation) {
  if (!(translation.norm() > 0.0)) {
    throw Error(ErrorCode::kDegenerate, kModule, "zero baseline");
  }
  const double parallax = angle_between(rotation * x1, x2);
  if (!(parallax > kMinParallax)) {
    throw Error(ErrorCode::kDegenerate, kModule,
                "parallax below " + std::to_string(kMinParallax) + " rad");
  }
  Triangulation out = solve_depths(x1, x2, rotation, translation);
  if (!(out.z1 > 0.0) || !(out.z2 > 0.0)) {
    throw Error(ErrorCode::kGeometry, kModule,
                "cheirality: triangulated depth is not positive");
  }
  return out;
}

Eigen::Matrix3d eight_point(std::span<const Eigen::Vector3d> x1,
                            std::span<const Eigen::Vector3d> x2) {
  if (x1.size() != x2.size()) {
    throw Error(ErrorCode::kPrecondition, kModule,
                "correspondence lists differ in length");
  }
  if (x1.size() < 8) {
    throw Error(ErrorCode::kPrecondition, kModule,
                "eight_point needs at least 8 pairs, got " +
                    std::to_string(x1.size()));
  }
  const Eigen::Matrix3d t1 = normalizer(x1);
  const Eigen::Matrix3d t2 = normalizer(x2);
  const Eigen::Index n = static_cast<Eigen::Index>(x1.size());
  Eigen::Matrix<double, Eigen::Dynamic, 9> a(std::max<Eigen::Index>(n, 9), 9);
  a.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = t1 * (x1[i] / x1[i].z());
    const Eigen::Vector3d q = t2 * (x2[i] / x2[i].z());
    // Row-major vec(E): x2^T E x1 = sum_jk q_j p_k E_jk.
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) a(i, 3 * j + k) = q[j] * p[k];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s[0] > 0.0) || s[7] < 1e-9 * s[0]) {
    throw Error(ErrorCode::kDegenerate, kModule,
                "eight_point constraint matrix has rank < 8");
  }
  const Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Eigen::Matrix3d en;
  en << e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8];
  Eigen::Matrix3d essential = t2.transpose() * en * t1;

  Eigen::JacobiSVD<Eigen::Matrix3d> proj(
      essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double sigma =
      0.5 * (proj.singularValues()[0] + proj.singularValues()[1]);
  essential = proj.matrixU() * Eigen::Vector3d(sigma, sigma, 0.0).asDiagonal() *
              proj.matrixV().transpose();
  essential /= essential.norm();

  const double peak = essential.cwiseAbs().maxCoeff();
  for (int i = 0; i < 9; ++i) {
    const double v = essential(i / 3, i % 3);
    if (std::abs(v) >= (1.0 - 1e-6) * peak) {
      if (v < 0.0) essential = -essential;
      break;
    }
  }
  return essential;
}

RelativePose decompose_essential(const Eigen::Matrix3d& essential,
                                 std::span<const Eigen::Vector3d> x1,
                                 std::span<const Eigen::Vector3d> x2) {
  if (x1.size() != x2.size() || x1.empty()) {
    throw Error(ErrorCode::kPrecondition, kModule,
                "decompose_essential needs matched, non-empty correspondences");
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u.col(2) *= -1.0;
  if (v.determinant() < 0.0) v.col(2) *= -1.0;
  Eigen::Matrix3d w;
  w << 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3d rotations[2] = {u * w * v.transpose(),
                                        u * w.transpose() * v.transpose()};
  const Eigen::Vector3d baseline = u.col(2).normalized();

  RelativePose best;
  best.inliers = -1;
  for (const auto& r : rotations) {
    for (double sign : {1.0, -1.0}) {
      const Eigen::Vector3d t = sign * baseline;
      int count = 0;
      for (std::size_t i = 0; i < x1.size(); ++i) {
        const Triangulation tri = solve_depths(x1[i], x2[i], r, t);
        if (tri.z1 > 0.0 && tri.z2 > 0.0) ++count;
      }
      if (count > best.inliers) best = {r, t, count};
    }
  }
  if (2 * best.inliers <= static_cast<int>(x1.size())) {
    throw Error(ErrorCode::kGeometry, kModule,
                "no essential-matrix decomposition passes cheirality");
  }
  return best;
}

}  // namespace eventvo
