#include <random>

#include <gtest/gtest.h>
#include <Eigen/SVD>

#include "eventvo/error.hpp"
#include "eventvo/two_view.hpp"
#include "eventvo/vo_pipeline.hpp"
#include "oracles.hpp"

using namespace eventvo;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kParse;
}

}  // namespace

TEST(EightPoint, SatisfiesEpipolarConstraintAndShape) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_two_view_scene(rng, 30);
    const Eigen::Matrix3d e = eight_point(s.x1, s.x2);
    for (std::size_t i = 0; i < s.x1.size(); ++i) {
      EXPECT_LT(std::abs(s.x2[i].dot(e * s.x1[i])), 1e-10);
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(e);
    const Eigen::Vector3d sv = svd.singularValues();
    EXPECT_NEAR(sv[0], sv[1], 1e-12);
    EXPECT_LT(sv[2], 1e-12);
    EXPECT_NEAR(e.norm(), 1.0, 1e-12);

    // Proportional to [t]x R with the documented sign.
    Eigen::Matrix3d ref = hat(s.translation) * s.rotation;
    ref /= ref.norm();
    Eigen::Index r, c;
    ref.cwiseAbs().maxCoeff(&r, &c);
    if (ref(r, c) < 0) ref = -ref;
    EXPECT_LT((e - ref).norm(), 1e-9);
  }
}

TEST(EightPoint, Preconditions) {
  std::mt19937_64 rng(2);
  const auto s = oracle::random_two_view_scene(rng, 10);
  std::vector<Eigen::Vector3d> seven(s.x1.begin(), s.x1.begin() + 7);
  EXPECT_EQ(code_of([&] { eight_point(seven, seven); }), ErrorCode::kPrecondition);
  std::vector<Eigen::Vector3d> nine(s.x2.begin(), s.x2.begin() + 9);
  EXPECT_EQ(code_of([&] { eight_point(s.x1, nine); }), ErrorCode::kPrecondition);
  std::vector<Eigen::Vector3d> same(10, Eigen::Vector3d(0.1, 0.2, 1.0));
  EXPECT_EQ(code_of([&] { eight_point(same, same); }), ErrorCode::kDegenerate);
}

TEST(Decompose, RecoversMotion) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_two_view_scene(rng, 20 + trial);
    const RelativePose rel = decompose_essential(eight_point(s.x1, s.x2), s.x1, s.x2);
    EXPECT_LT(oracle::angle_of(rel.rotation.transpose() * s.rotation), 1e-8);
    EXPECT_LT(angle_between(rel.translation, s.translation), 1e-8);
    EXPECT_NEAR(rel.translation.norm(), 1.0, 1e-12);
    EXPECT_EQ(rel.inliers, static_cast<int>(s.x1.size()));
  }
}

TEST(Triangulate, ExactDepths) {
  std::mt19937_64 rng(4);
  const auto s = oracle::random_two_view_scene(rng, 40);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const Triangulation t = triangulate(s.x1[i], s.x2[i], s.rotation, s.translation);
    EXPECT_LT(std::abs(t.z1 - s.points[i].z()) / s.points[i].z(), 1e-12);
    const Eigen::Vector3d q = s.rotation * s.points[i] + s.translation;
    EXPECT_LT(std::abs(t.z2 - q.z()) / q.z(), 1e-12);
    EXPECT_LT(t.residual, 1e-10);
    EXPECT_GT(t.parallax, 0.0);
  }
}

TEST(Triangulate, DegenerateAndBehind) {
  const Eigen::Vector3d x(0.1, 0.0, 1.0);
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  EXPECT_EQ(code_of([&] { triangulate(x, x, r, Eigen::Vector3d(1, 0, 0)); }),
            ErrorCode::kDegenerate);
  EXPECT_EQ(code_of([&] { triangulate(x, x, r, Eigen::Vector3d::Zero()); }),
            ErrorCode::kDegenerate);
  // Rays that only meet behind the first camera.
  const Eigen::Vector3d x1(0.1, 0.0, 1.0), x2(0.3, 0.0, 1.0);
  EXPECT_EQ(code_of([&] { triangulate(x1, x2, r, Eigen::Vector3d(-1, 0, 0)); }),
            ErrorCode::kGeometry);
}

TEST(Bootstrap, StatusesAndScale) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(5);
  const auto s = oracle::random_two_view_scene(rng, 40);
  FeatureObservations f0, f1;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    f0[static_cast<int>(i)] = project(s.points[i], k);
    f1[static_cast<int>(i)] = project(s.rotation * s.points[i] + s.translation, k);
  }

  FeatureObservations few;
  for (int i = 0; i < 7; ++i) few[i] = f0[i];
  EXPECT_EQ(bootstrap(few, f1, k, 1.0, 1.0).status, BootstrapStatus::kTooFewPairs);
  EXPECT_EQ(bootstrap(f0, f0, k, 1.0, 1.0).status, BootstrapStatus::kLowDisparity);

  const double baseline = 2.5;
  const BootstrapResult b = bootstrap(f0, f1, k, baseline, 1.0);
  ASSERT_EQ(b.status, BootstrapStatus::kOk);
  EXPECT_EQ(b.pairs, 40);
  EXPECT_NEAR(b.pose1.translation().norm(), baseline, 1e-9);
  const double scale = baseline / s.translation.norm();
  for (const auto& [id, p] : b.points) {
    EXPECT_LT((p - scale * s.points[id]).norm() / p.norm(), 1e-8);
  }
}
