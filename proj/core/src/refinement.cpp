#include "eventvo/refinement.hpp"

#include <cmath>

#include <algorithm>

#include <Eigen/Cholesky>

#include "eventvo/pose_optimizer.hpp"

namespace eventvo {

std::optional<Eigen::Vector3d> refine_point(const Eigen::Vector3d& init,
                                            std::span<const PointObservation> obs,
                                            const CameraIntrinsics& k,
                                            int iterations) {
  if (obs.size() < 2) return std::nullopt;
  Eigen::Vector3d p = init;
  for (int it = 0; it < iterations; ++it) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (const auto& o : obs) {
      const Eigen::Vector3d pc = o.t_cw * p;
      if (!(pc.z() > 0.0)) return std::nullopt;
      const double iz = 1.0 / pc.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << k.fx * iz, 0.0, -k.fx * pc.x() * iz * iz,
             0.0, k.fy * iz, -k.fy * pc.y() * iz * iz;
      const Eigen::Matrix<double, 2, 3> j = dpi * o.t_cw.rotation();
      const Eigen::Vector2d r = project(pc, k) - o.pixel;
      h += j.transpose() * j;
      g += j.transpose() * r;
    }
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(h);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
      return std::nullopt;
    }
    const Eigen::Vector3d step = ldlt.solve(-g);
    if (!step.allFinite()) return std::nullopt;
    p += step;
    if (step.norm() < 1e-10 * (1.0 + p.norm())) break;
  }
  for (const auto& o : obs) {
    if (!((o.t_cw * p).z() > 0.0)) return std::nullopt;
  }
  return p;
}

}  // namespace eventvo

namespace eventvo {

namespace {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix63 = Eigen::Matrix<double, 6, 3>;

struct BundleCost {
  double cost = 0.0;
  std::size_t valid = 0;  // observations in front of their camera
};

BundleCost bundle_cost(const BundleProblem& p, const CameraIntrinsics& k, double delta) {
  BundleCost c;
  for (const auto& o : p.observations) {
    const Eigen::Vector3d pc = p.poses[o.camera] * p.points[o.point];
    if (!(pc.z() > 0.0)) continue;
    c.cost += huber_cost((project(pc, k) - o.pixel).norm(), delta);
    ++c.valid;
  }
  return c;
}

}  // namespace

BundleReport bundle_adjust(BundleProblem& p, const CameraIntrinsics& k,
                           const BundleOptions& options) {
  BundleReport report;
  const int n_poses = static_cast<int>(p.poses.size());
  const int n_points = static_cast<int>(p.points.size());
  std::vector<int> slot(n_poses, -1);
  int n_free = 0;
  for (int i = 0; i < n_poses; ++i) {
    if (!p.fixed[i]) slot[i] = n_free++;
  }
  BundleCost current = bundle_cost(p, k, options.huber_delta);
  report.initial_cost = report.final_cost = current.cost;
  if (p.observations.empty()) return report;

  std::vector<std::vector<int>> by_point(n_points);
  for (int i = 0; i < static_cast<int>(p.observations.size()); ++i) {
    by_point[p.observations[i].point].push_back(i);
  }

  double lambda = options.initial_lambda;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    ++report.iterations;
    const int dim = 6 * n_free;
    Eigen::MatrixXd hpp = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd gp = Eigen::VectorXd::Zero(dim);
    std::vector<Eigen::Matrix3d> hll(n_points, Eigen::Matrix3d::Zero());
    std::vector<Eigen::Vector3d> gl(n_points, Eigen::Vector3d::Zero());
    std::vector<Matrix63> hpl(p.observations.size(), Matrix63::Zero());
    std::vector<bool> used(p.observations.size(), false);

    for (int i = 0; i < static_cast<int>(p.observations.size()); ++i) {
      const auto& o = p.observations[i];
      const PoseSE3& t = p.poses[o.camera];
      const Eigen::Vector3d pc = t * p.points[o.point];
      if (!(pc.z() > 0.0)) continue;
      const Eigen::Vector2d r = project(pc, k) - o.pixel;
      const double w = compute_weight(r, options.huber_delta);
      const double iz = 1.0 / pc.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << k.fx * iz, 0.0, -k.fx * pc.x() * iz * iz,
             0.0, k.fy * iz, -k.fy * pc.y() * iz * iz;
      const Eigen::Matrix<double, 2, 3> jl = dpi * t.rotation();
      hll[o.point] += w * jl.transpose() * jl;
      gl[o.point] += w * jl.transpose() * r;
      used[i] = true;
      const int s = slot[o.camera];
      if (s < 0) continue;
      // Left perturbation exp(d) T: d(Pc) = [I | -hat(Pc)] d.
      Eigen::Matrix<double, 3, 6> dp;
      dp << Eigen::Matrix3d::Identity(), -hat(pc);
      const Eigen::Matrix<double, 2, 6> jp = dpi * dp;
      hpp.block<6, 6>(6 * s, 6 * s) += w * jp.transpose() * jp;
      gp.segment<6>(6 * s) += w * jp.transpose() * r;
      hpl[i] = w * jp.transpose() * jl;
    }

    // Damped point blocks and the reduced camera system.
    std::vector<Eigen::Matrix3d> hll_inv(n_points, Eigen::Matrix3d::Zero());
    std::vector<bool> point_ok(n_points, false);
    Eigen::MatrixXd s_mat = hpp;
    for (int i = 0; i < dim; ++i) s_mat(i, i) += lambda * (1.0 + hpp(i, i));
    Eigen::VectorXd b = -gp;
    for (int j = 0; j < n_points; ++j) {
      Eigen::Matrix3d h = hll[j];
      for (int d = 0; d < 3; ++d) h(d, d) += lambda * (1.0 + hll[j](d, d));
      const Eigen::LDLT<Eigen::Matrix3d> ldlt(h);
      if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) continue;
      point_ok[j] = true;
      hll_inv[j] = ldlt.solve(Eigen::Matrix3d::Identity());
      for (int a : by_point[j]) {
        const int sa = slot[p.observations[a].camera];
        if (!used[a] || sa < 0) continue;
        const Matrix63 wa = hpl[a] * hll_inv[j];
        b.segment<6>(6 * sa) += wa * gl[j];
        for (int c : by_point[j]) {
          const int sc = slot[p.observations[c].camera];
          if (!used[c] || sc < 0) continue;
          s_mat.block<6, 6>(6 * sa, 6 * sc) -= wa * hpl[c].transpose();
        }
      }
    }
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(dim);
    if (dim > 0) {
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(s_mat);
      if (ldlt.info() != Eigen::Success) break;
      dx = ldlt.solve(b);
      if (!dx.allFinite()) break;
    }

    BundleProblem trial = p;
    for (int i = 0; i < n_poses; ++i) {
      if (slot[i] >= 0) trial.poses[i] = se3_exp(dx.segment<6>(6 * slot[i])) * p.poses[i];
    }
    for (int j = 0; j < n_points; ++j) {
      if (!point_ok[j]) continue;
      Eigen::Vector3d rhs = -gl[j];
      for (int a : by_point[j]) {
        const int sa = slot[p.observations[a].camera];
        if (used[a] && sa >= 0) rhs -= hpl[a].transpose() * dx.segment<6>(6 * sa);
      }
      trial.points[j] += hll_inv[j] * rhs;
    }
    // A step that pushes points behind a camera would lower the cost by
    // dropping those terms; it is rejected instead.
    const BundleCost next = bundle_cost(trial, k, options.huber_delta);
    if (std::isfinite(next.cost) && next.valid >= current.valid &&
        next.cost < current.cost) {
      const double gain = current.cost - next.cost;
      const double cost = next.cost;
      p = std::move(trial);
      current = next;
      report.final_cost = cost;
      lambda = std::max(lambda / 10.0, 1e-12);
      if (gain < 1e-10 * (1.0 + cost)) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e8) break;
    }
  }
  return report;
}

}  // namespace eventvo
