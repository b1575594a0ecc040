#include "eventvo/pose_optimizer.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "eventvo/error.hpp"
#include "eventvo/logging.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "pose_optimizer";
constexpr int kMaxRejections = 12;

struct Linearization {
  Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
};

}  // namespace

std::optional<Eigen::Vector2d> reprojection_error(const PoseSE3& t_cw,
                                                  const Observation& obs,
                                                  const CameraIntrinsics& k) {
  const auto px = try_project(t_cw * obs.point, k);
  if (!px) return std::nullopt;
  return Eigen::Vector2d(obs.pixel - *px);
}

std::optional<Eigen::Vector2d> reprojection_error(const Twist& xi,
                                                  const Observation& obs,
                                                  const CameraIntrinsics& k) {
  return reprojection_error(se3_exp(xi), obs, k);
}

std::optional<Jacobian26> reprojection_jacobian(const PoseSE3& t_cw,
                                                const Observation& obs,
                                                const CameraIntrinsics& k) {
  const Eigen::Vector3d pc = t_cw * obs.point;
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double iz = 1.0 / pc.z();
  Eigen::Matrix<double, 2, 3> dpi;
  dpi << k.fx * iz, 0.0, -k.fx * pc.x() * iz * iz,
         0.0, k.fy * iz, -k.fy * pc.y() * iz * iz;
  Eigen::Matrix<double, 3, 6> dp;
  dp.leftCols<3>().setIdentity();
  dp.rightCols<3>() = -hat(pc);
  return Jacobian26(-dpi * dp);
}

std::optional<Jacobian26> reprojection_jacobian(const Twist& xi,
                                                const Observation& obs,
                                                const CameraIntrinsics& k) {
  return reprojection_jacobian(se3_exp(xi), obs, k);
}

double compute_weight(const Eigen::Vector2d& e, double delta) {
  const double r = e.norm();
  return r <= delta ? 1.0 : delta / r;
}

double huber_cost(double r, double delta) {
  return r <= delta ? r * r : 2.0 * delta * r - delta * delta;
}

OptimizerResult optimize_pose(const PoseSE3& init,
                              std::span<const Observation> observations,
                              const CameraIntrinsics& k,
                              const OptimizerOptions& options) {
  OptimizerResult result;
  result.pose = init;
  OptimizerReport& report = result.report;

  // Observations behind the camera at the start are excluded for the run.
  std::vector<const Observation*> active;
  for (const auto& obs : observations) {
    if (obs.weight > 0.0 && reprojection_error(init, obs, k)) {
      active.push_back(&obs);
    } else if (obs.weight > 0.0) {
      ++report.invalid_observations;
    }
  }
  report.valid_observations = static_cast<int>(active.size());
  if (active.size() < 3) {
    throw Error(ErrorCode::kUnderdetermined, kModule,
                "need at least 3 valid observations, have " +
                    std::to_string(active.size()));
  }

  // Total robust cost; infinite if any point falls behind the camera.
  auto cost = [&](const PoseSE3& t) {
    double sum = 0.0;
    for (const Observation* obs : active) {
      const auto e = reprojection_error(t, *obs, k);
      if (!e) return std::numeric_limits<double>::infinity();
      sum += obs->weight * huber_cost(e->norm(), options.huber_delta);
    }
    return sum;
  };
  auto linearize = [&](const PoseSE3& t) {
    Linearization lin;
    for (const Observation* obs : active) {
      const auto e = reprojection_error(t, *obs, k);
      const auto j = reprojection_jacobian(t, *obs, k);
      if (!e || !j) continue;
      const double w = obs->weight * compute_weight(*e, options.huber_delta);
      lin.h.noalias() += w * j->transpose() * *j;
      lin.g.noalias() += w * j->transpose() * *e;
    }
    return lin;
  };

  PoseSE3 pose = init;
  double current = cost(pose);
  report.initial_error = current;
  report.accepted_errors.push_back(current);
  double lambda = options.initial_lambda;

  for (int it = 0; it < options.max_iterations; ++it) {
    report.iterations = it + 1;
    const Linearization lin = linearize(pose);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(lin.h);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > options.max_condition) {
      throw Error(ErrorCode::kDegenerate, kModule,
                  "normal matrix is ill-conditioned (condition " +
                      std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
    }

    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
      Eigen::Matrix<double, 6, 6> damped = lin.h;
      damped.diagonal().array() += lambda;
      const Vector6d delta = damped.ldlt().solve(-lin.g);
      report.step_norm = delta.norm();
      const PoseSE3 candidate = se3_exp(delta) * pose;
      const double trial = cost(candidate);
      if (trial <= current) {
        pose = candidate;
        current = trial;
        report.accepted_errors.push_back(current);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      if (report.step_norm < options.tolerance) break;
      lambda *= 10.0;
    }
    if (report.step_norm < options.tolerance) {
      report.converged = true;
      break;
    }
    if (!accepted) {
      log::debug(kModule, "no decreasing step after ", kMaxRejections,
                 " damping increases");
      break;
    }
  }
  report.final_error = current;
  result.pose = pose;
  return result;
}

std::pair<Twist, OptimizerReport> optimize_pose(
    const Twist& xi_init, std::span<const Observation> observations,
    const CameraIntrinsics& k, const OptimizerOptions& options) {
  OptimizerResult r = optimize_pose(se3_exp(xi_init), observations, k, options);
  return {se3_log(r.pose), r.report};
}

}  // namespace eventvo
