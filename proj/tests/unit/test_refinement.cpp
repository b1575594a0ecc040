#include <random>

#include <gtest/gtest.h>

#include "eventvo/config.hpp"
#include "eventvo/refinement.hpp"
#include "eventvo/vo_pipeline.hpp"
#include "oracles.hpp"

using namespace eventvo;

namespace {

// Camera-to-world poses of a forward-moving camera (z forward) with a slight
// yaw, plus points ahead of it.
struct Sequence {
  std::vector<PoseSE3> t_wc;
  std::vector<Eigen::Vector3d> points;
};

Sequence make_sequence(std::mt19937_64& rng, int views, int n_points) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sequence s;
  for (int v = 0; v < views; ++v) {
    const double yaw = 0.01 * v;
    s.t_wc.emplace_back(oracle::rotation_from(Eigen::Vector3d(0, yaw, 0)),
                        Eigen::Vector3d(0.3 * v, 0.02 * v, 0.5 * v));
  }
  for (int i = 0; i < n_points; ++i) {
    s.points.emplace_back(6.0 * u(rng), 3.0 * u(rng), 12.0 + 6.0 * u(rng));
  }
  return s;
}

}  // namespace

TEST(RefinePoint, RecoversPointFromRoughStart) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(31);
  const Sequence s = make_sequence(rng, 5, 20);
  for (const auto& p : s.points) {
    std::vector<PointObservation> obs;
    for (const auto& t : s.t_wc) obs.push_back({t.inverse(), project(t.inverse() * p, k)});
    const auto r = refine_point(p + Eigen::Vector3d(0.3, -0.2, 1.0), obs, k);
    ASSERT_TRUE(r.has_value());
    EXPECT_LT((*r - p).norm(), 1e-8);
  }
}

TEST(RefinePoint, RejectsBadInput) {
  const CameraIntrinsics k = oracle::test_camera();
  const PointObservation one{PoseSE3(), {173.0, 130.0}};
  std::vector<PointObservation> single{one};
  EXPECT_FALSE(refine_point(Eigen::Vector3d(0, 0, 5), single, k).has_value());
  std::vector<PointObservation> two{one, {PoseSE3(Eigen::Matrix3d::Identity(), Eigen::Vector3d(-1, 0, 0)), {150.0, 130.0}}};
  EXPECT_FALSE(refine_point(Eigen::Vector3d(0, 0, -5), two, k).has_value());
}

TEST(BundleAdjust, NoiselessProblemReachesZeroCost) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(32);
  const Sequence s = make_sequence(rng, 6, 60);
  std::normal_distribution<double> g(0.0, 1.0);

  BundleProblem problem;
  for (std::size_t v = 0; v < s.t_wc.size(); ++v) {
    PoseSE3 t_cw = s.t_wc[v].inverse();
    if (v >= 2) {
      Twist d;
      d << 0.02 * g(rng), 0.02 * g(rng), 0.02 * g(rng), 0.003 * g(rng), 0.003 * g(rng),
          0.003 * g(rng);
      t_cw = se3_exp(d) * t_cw;
    }
    problem.poses.push_back(t_cw);
    problem.fixed.push_back(v < 2);
  }
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    problem.points.push_back(s.points[i] + 0.1 * Eigen::Vector3d(g(rng), g(rng), g(rng)));
    for (std::size_t v = 0; v < s.t_wc.size(); ++v) {
      problem.observations.push_back({static_cast<int>(v), static_cast<int>(i),
                                      project(s.t_wc[v].inverse() * s.points[i], k)});
    }
  }
  const PoseSE3 fixed0 = problem.poses[0];
  const BundleReport r = bundle_adjust(problem, k, {50, 1.5, 1e-4});
  EXPECT_LT(r.final_cost, 1e-12 * std::max(1.0, r.initial_cost));
  EXPECT_LE(r.final_cost, r.initial_cost);
  EXPECT_EQ((problem.poses[0].rotation() - fixed0.rotation()).norm(), 0.0);
  EXPECT_EQ((problem.poses[0].translation() - fixed0.translation()).norm(), 0.0);
  for (std::size_t v = 0; v < s.t_wc.size(); ++v) {
    const PoseDistance d = pose_distance(problem.poses[v], s.t_wc[v].inverse());
    EXPECT_LT(d.rotation, 1e-7);
    EXPECT_LT(d.translation, 1e-6);
  }
}

TEST(BundleAdjust, CostNeverIncreasesWithNoise) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(33);
  const Sequence s = make_sequence(rng, 5, 40);
  std::normal_distribution<double> g(0.0, 1.0);
  BundleProblem problem;
  for (std::size_t v = 0; v < s.t_wc.size(); ++v) {
    problem.poses.push_back(s.t_wc[v].inverse());
    problem.fixed.push_back(v == 0);
  }
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    problem.points.push_back(s.points[i]);
    for (std::size_t v = 0; v < s.t_wc.size(); ++v) {
      problem.observations.push_back(
          {static_cast<int>(v), static_cast<int>(i),
           project(s.t_wc[v].inverse() * s.points[i], k) + Eigen::Vector2d(g(rng), g(rng))});
    }
  }
  for (int iters : {1, 3, 10}) {
    BundleProblem copy = problem;
    const BundleReport r = bundle_adjust(copy, k, {iters, 1.5, 1e-4});
    EXPECT_LE(r.final_cost, r.initial_cost);
    EXPECT_LE(r.iterations, iters);
  }
}

TEST(RefineBootstrap, RecoversSequenceUpToScale) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(34);
  const Sequence s = make_sequence(rng, 8, 80);
  std::vector<FeatureObservations> views;
  for (const auto& t : s.t_wc) {
    FeatureObservations f;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto px = try_project(t.inverse() * s.points[i], k);
      if (px && k.contains(*px)) f[static_cast<int>(i)] = *px;
    }
    views.push_back(f);
  }
  Config config;
  config.width = k.width;
  config.height = k.height;
  config.fx = k.fx;
  config.fy = k.fy;
  config.cx = k.cx;
  config.cy = k.cy;
  config.bootstrap_baseline = 1.0;
  const auto r = refine_bootstrap(views, k, config);
  ASSERT_TRUE(r.has_value());
  ASSERT_EQ(r->poses.size(), views.size());
  EXPECT_LT(r->poses[0].translation().norm(), 1e-12);
  EXPECT_NEAR(r->poses.back().translation().norm(), 1.0, 1e-9);
  const double scale = 1.0 / s.t_wc.back().translation().norm();
  for (std::size_t v = 0; v < views.size(); ++v) {
    EXPECT_LT((r->poses[v].translation() - scale * s.t_wc[v].translation()).norm(), 1e-6);
    EXPECT_LT(oracle::angle_of(r->poses[v].rotation().transpose() * s.t_wc[v].rotation()), 1e-7);
  }
  EXPECT_LT(r->mean_cost, 1e-10);
  EXPECT_GE(r->hypotheses, 1);
}
