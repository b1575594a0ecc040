#include <random>

#include <gtest/gtest.h>

#include "eventvo/error.hpp"
#include "eventvo/pose_optimizer.hpp"
#include "oracles.hpp"

using namespace eventvo;

namespace {

struct Problem {
  PoseSE3 truth;  // world-to-camera
  std::vector<Observation> obs;
};

Problem make_problem(std::mt19937_64& rng, int n, double noise = 0.0) {
  const CameraIntrinsics k = oracle::test_camera();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, noise > 0 ? noise : 1.0);
  Problem p;
  p.truth = PoseSE3(oracle::rotation_from(0.3 * u(rng) * oracle::random_unit(rng)),
                    Eigen::Vector3d(u(rng), u(rng), u(rng)));
  const PoseSE3 t_wc = p.truth.inverse();
  while (static_cast<int>(p.obs.size()) < n) {
    const Eigen::Vector3d pc(5.0 * u(rng), 3.5 * u(rng), 8.0 + 5.0 * u(rng));
    const Eigen::Vector2d px = project(pc, k);
    if (!k.contains(px)) continue;
    Eigen::Vector2d noisy = px;
    if (noise > 0) noisy += Eigen::Vector2d(g(rng), g(rng));
    p.obs.push_back({noisy, t_wc * pc, 1.0});
  }
  return p;
}

PoseSE3 perturb(const PoseSE3& t, std::mt19937_64& rng, double rot, double trans) {
  Twist d;
  d.head<3>() = trans * oracle::random_unit(rng);
  d.tail<3>() = rot * oracle::random_unit(rng);
  return se3_exp(d) * t;
}

}  // namespace

TEST(Jacobian, MatchesCentralDifferences) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = make_problem(rng, 1);
    const PoseSE3 t = perturb(p.truth, rng, 0.05, 0.05);
    const auto j = reprojection_jacobian(t, p.obs[0], k);
    ASSERT_TRUE(j.has_value());
    Jacobian26 fd;
    const double h = 1e-6;
    for (int c = 0; c < 6; ++c) {
      Twist d = Twist::Zero();
      d[c] = h;
      const auto ep = reprojection_error(se3_exp(d) * t, p.obs[0], k);
      const auto em = reprojection_error(se3_exp(-d) * t, p.obs[0], k);
      fd.col(c) = (*ep - *em) / (2 * h);
    }
    EXPECT_LT((*j - fd).norm() / j->norm(), 1e-6);
  }
}

TEST(Jacobian, TwistOverloadAgrees) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(22);
  auto p = make_problem(rng, 1);
  const Twist xi = se3_log(p.truth);
  EXPECT_LT((*reprojection_jacobian(xi, p.obs[0], k) -
             *reprojection_jacobian(p.truth, p.obs[0], k)).norm(),
            1e-9);
  EXPECT_LT(reprojection_error(xi, p.obs[0], k)->norm(), 1e-9);
}

TEST(Jacobian, BehindCameraIsEmpty) {
  const CameraIntrinsics k = oracle::test_camera();
  const Observation o{{173, 130}, {0, 0, -2}, 1.0};
  EXPECT_FALSE(reprojection_error(PoseSE3(), o, k).has_value());
  EXPECT_FALSE(reprojection_jacobian(PoseSE3(), o, k).has_value());
}

TEST(Huber, WeightIsCostDerivative) {
  const double delta = 1.5;
  for (double r : {0.1, 0.9, 1.5, 2.0, 7.0}) {
    const double h = 1e-6;
    const double slope = (huber_cost(r + h, delta) - huber_cost(r - h, delta)) / (2 * h);
    const double w = compute_weight(Eigen::Vector2d(r, 0.0), delta);
    EXPECT_NEAR(slope, 2.0 * w * r, 1e-6);
  }
  EXPECT_DOUBLE_EQ(compute_weight(Eigen::Vector2d(0.3, 0.4), delta), 1.0);
  EXPECT_DOUBLE_EQ(compute_weight(Eigen::Vector2d(3.0, 4.0), delta), 0.3);
}

TEST(Optimizer, ConvergesFromPerturbedInit) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = make_problem(rng, 50);
    const PoseSE3 init = perturb(p.truth, rng, 0.1, 0.1);
    const OptimizerResult r = optimize_pose(init, p.obs, k);
    const PoseDistance d = pose_distance(r.pose, p.truth);
    EXPECT_LT(d.rotation, 1e-6);
    EXPECT_LT(d.translation, 1e-6);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.iterations, 10);
    for (std::size_t i = 1; i < r.report.accepted_errors.size(); ++i) {
      EXPECT_LE(r.report.accepted_errors[i], r.report.accepted_errors[i - 1]);
    }
    EXPECT_EQ(r.report.valid_observations, 50);
  }
}

TEST(Optimizer, RobustToOutliers) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(24);
  auto p = make_problem(rng, 80, 0.5);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (std::size_t i = 0; i < p.obs.size(); i += 5) p.obs[i].pixel += Eigen::Vector2d(u(rng), u(rng));
  const OptimizerResult r = optimize_pose(perturb(p.truth, rng, 0.05, 0.05), p.obs, k);
  const PoseDistance d = pose_distance(r.pose, p.truth);
  EXPECT_LT(d.rotation, 5e-3);
  EXPECT_LT(d.translation, 5e-2);
}

TEST(Optimizer, TwistEntryPoint) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(25);
  auto p = make_problem(rng, 30);
  const auto [xi, report] = optimize_pose(se3_log(perturb(p.truth, rng, 0.05, 0.05)), p.obs, k);
  EXPECT_LT((se3_log(p.truth) - xi).norm(), 1e-6);
  EXPECT_TRUE(report.converged);
}

TEST(Optimizer, Preconditions) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(26);
  auto p = make_problem(rng, 2);
  try {
    optimize_pose(p.truth, p.obs, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnderdetermined);
  }
  // Every observation of one world point: the pose is unobservable.
  auto q = make_problem(rng, 1);
  std::vector<Observation> same(10, q.obs[0]);
  try {
    optimize_pose(q.truth, same, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}
