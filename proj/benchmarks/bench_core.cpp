#include <random>

#include <benchmark/benchmark.h>

#include "eventvo/depth_filter.hpp"
#include "eventvo/frame_builder.hpp"
#include "eventvo/frontend.hpp"
#include "eventvo/harris.hpp"
#include "eventvo/pose_optimizer.hpp"
#include "eventvo/refinement.hpp"
#include "eventvo/synthetic.hpp"
#include "eventvo/two_view.hpp"
#include "eventvo/vo_pipeline.hpp"
#include "oracles.hpp"

using namespace eventvo;

namespace {

void BM_OptimizePose(benchmark::State& state) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PoseSE3 truth(oracle::rotation_from(Eigen::Vector3d(0.1, -0.2, 0.05)),
                      Eigen::Vector3d(0.3, -0.1, 0.2));
  std::vector<Observation> obs;
  while (static_cast<int>(obs.size()) < state.range(0)) {
    const Eigen::Vector3d pc(5.0 * u(rng), 3.5 * u(rng), 8.0 + 5.0 * u(rng));
    const Eigen::Vector2d px = project(pc, k);
    if (k.contains(px)) obs.push_back({px, truth.inverse() * pc, 1.0});
  }
  Twist d;
  d << 0.05, -0.05, 0.05, 0.05, 0.02, -0.04;
  const PoseSE3 init = se3_exp(d) * truth;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_pose(init, obs, k));
}
BENCHMARK(BM_OptimizePose)->Arg(50)->Arg(200);

void BM_EightPoint(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto s = oracle::random_two_view_scene(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const Eigen::Matrix3d e = eight_point(s.x1, s.x2);
    benchmark::DoNotOptimize(decompose_essential(e, s.x1, s.x2));
  }
}
BENCHMARK(BM_EightPoint)->Arg(20)->Arg(200);

void BM_DepthUpdate(benchmark::State& state) {
  const DepthFilterState s0 = init_filter(0.5, 50.0, 0);
  for (auto _ : state) {
    DepthFilterState s = s0;
    for (int i = 0; i < 10; ++i) s = update(s, {12.0 + 0.01 * i, 0.36});
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_DepthUpdate);

void BM_Harris(benchmark::State& state) {
  Image img = Image::Zero(260, 346);
  img.block(60, 80, 100, 120).setConstant(1.0);
  img.block(150, 200, 60, 90).setConstant(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(detect_harris(img, 100, 5.0));
}
BENCHMARK(BM_Harris);

void BM_EmWindowFlow(benchmark::State& state) {
  const auto events = oracle::moving_edge_events({20.0, 20.0}, {50.0, 0.0}, 0.0, 0.03,
                                                 static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(em_window_flow(events, 0.0, Eigen::Vector2d::Zero()));
  }
}
BENCHMARK(BM_EmWindowFlow)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BundleAdjust(benchmark::State& state) {
  const CameraIntrinsics k = oracle::test_camera();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  BundleProblem problem;
  const int views = 8;
  for (int v = 0; v < views; ++v) {
    const PoseSE3 t_wc(oracle::rotation_from(Eigen::Vector3d(0, 0.01 * v, 0)),
                       Eigen::Vector3d(0.3 * v, 0.02 * v, 0.5 * v));
    problem.poses.push_back(t_wc.inverse());
    problem.fixed.push_back(v < 2);
  }
  for (int i = 0; i < state.range(0); ++i) {
    const Eigen::Vector3d p(6.0 * u(rng), 3.0 * u(rng), 12.0 + 6.0 * u(rng));
    problem.points.push_back(p);
    for (int v = 0; v < views; ++v) {
      problem.observations.push_back(
          {v, i, project(problem.poses[v] * p, k) + Eigen::Vector2d(g(rng), g(rng))});
    }
  }
  for (auto _ : state) {
    BundleProblem copy = problem;
    benchmark::DoNotOptimize(bundle_adjust(copy, k));
  }
}
BENCHMARK(BM_BundleAdjust)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SyntheticRun(benchmark::State& state) {
  const SceneSpec spec;
  const SyntheticScene scene = generate_scene(spec);
  const Config config = suggested_config(spec);
  const auto frames = replay_observations(scene.tracks, config);
  for (auto _ : state) {
    VoPipeline p(config);
    for (const auto& f : frames) p.process(f);
    p.finish();
    benchmark::DoNotOptimize(p.trajectory());
  }
}
BENCHMARK(BM_SyntheticRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
