#include "eventvo/feature_tracker.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace eventvo {

namespace {

struct Patch {
  std::vector<Eigen::Vector2d> offsets;
  Eigen::VectorXd values;
  Eigen::VectorXd gx;
  Eigen::VectorXd gy;
};

Patch make_template(const Image& img, const Eigen::Vector2d& centre, int half) {
  Patch p;
  const int n = (2 * half + 1) * (2 * half + 1);
  p.offsets.reserve(n);
  p.values.resize(n);
  p.gx.resize(n);
  p.gy.resize(n);
  int k = 0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx, ++k) {
      const double x = centre.x() + dx;
      const double y = centre.y() + dy;
      p.offsets.emplace_back(dx, dy);
      p.values[k] = sample_bilinear(img, x, y);
      p.gx[k] = 0.5 * (sample_bilinear(img, x + 1, y) - sample_bilinear(img, x - 1, y));
      p.gy[k] = 0.5 * (sample_bilinear(img, x, y + 1) - sample_bilinear(img, x, y - 1));
    }
  }
  return p;
}

// Patch residual I(centre + M [x; 1]) - T(x).
Eigen::VectorXd residual(const Image& img, const Patch& tpl,
                         const Eigen::Vector2d& centre,
                         const Eigen::Matrix<double, 2, 3>& warp) {
  Eigen::VectorXd r(tpl.values.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const Eigen::Vector2d q =
        centre + warp.leftCols<2>() * tpl.offsets[k] + warp.col(2);
    r[k] = sample_bilinear(img, q.x(), q.y()) - tpl.values[k];
  }
  return r;
}

template <int N>
Eigen::Matrix<double, N, 1> solve_damped(const Eigen::Matrix<double, N, N>& h,
                                         const Eigen::Matrix<double, N, 1>& b,
                                         bool& ok) {
  Eigen::Matrix<double, N, N> damped = h;
  damped.diagonal().array() += 1e-9 * h.trace() + 1e-12;
  Eigen::LDLT<Eigen::Matrix<double, N, N>> ldlt(damped);
  ok = ldlt.info() == Eigen::Success && h.trace() > 0.0;
  return ok ? Eigen::Matrix<double, N, 1>(ldlt.solve(b))
            : Eigen::Matrix<double, N, 1>::Zero();
}

}  // namespace

std::vector<TrackResult> track_features(
    const Image& prev, const Image& cur,
    std::span<const Eigen::Vector2d> positions, const TrackerOptions& options,
    std::span<const Eigen::Vector2d> predicted) {
  const int half = options.patch_size / 2;
  const Image prev_coarse = gaussian_blur(prev, options.coarse_sigma);
  const Image cur_coarse = gaussian_blur(cur, options.coarse_sigma);
  const Image prev_fine = gaussian_blur(prev, options.fine_sigma);
  const Image cur_fine = gaussian_blur(cur, options.fine_sigma);
  const double width = static_cast<double>(cur.cols());
  const double height = static_cast<double>(cur.rows());
  auto inside = [&](const Eigen::Vector2d& p) {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= width - 1.0 &&
           p.y() <= height - 1.0;
  };

  std::vector<TrackResult> results(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    TrackResult& res = results[i];
    const Eigen::Vector2d& p = positions[i];
    Eigen::Vector2d d = i < predicted.size() ? predicted[i]
                                             : Eigen::Vector2d::Zero();
    res.position = p + d;
    if (!inside(p + d)) continue;

    // Translation-only stage.
    const Patch coarse = make_template(prev_coarse, p, half);
    Eigen::Matrix2d h2 = Eigen::Matrix2d::Zero();
    for (Eigen::Index k = 0; k < coarse.values.size(); ++k) {
      const Eigen::Vector2d g(coarse.gx[k], coarse.gy[k]);
      h2 += g * g.transpose();
    }
    bool ok = true;
    for (int it = 0; it < options.max_iterations; ++it) {
      Eigen::Matrix<double, 2, 3> warp;
      warp << 1.0, 0.0, d.x(), 0.0, 1.0, d.y();
      const Eigen::VectorXd r = residual(cur_coarse, coarse, p, warp);
      const Eigen::Vector2d b(coarse.gx.dot(r), coarse.gy.dot(r));
      const Eigen::Vector2d step = solve_damped<2>(h2, b, ok);
      if (!ok) break;
      d -= step;
      if (step.norm() < options.step_tolerance) break;
    }
    if (!ok || !d.allFinite()) continue;

    // Affine stage. Parameters (dx, dy, a11, a12, a21, a22).
    const Patch fine = make_template(prev_fine, p, half);
    const Eigen::Index n = fine.values.size();
    Eigen::Matrix<double, Eigen::Dynamic, 6> sd(n, 6);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double x = fine.offsets[k].x();
      const double y = fine.offsets[k].y();
      sd.row(k) << fine.gx[k], fine.gy[k], fine.gx[k] * x, fine.gx[k] * y,
          fine.gy[k] * x, fine.gy[k] * y;
    }
    const Eigen::Matrix<double, 6, 6> h6 = sd.transpose() * sd;
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 2) = d.x();
    m(1, 2) = d.y();
    for (int it = 0; it < options.max_iterations; ++it) {
      const Eigen::VectorXd r = residual(cur_fine, fine, p, m.topRows<2>());
      const Eigen::Matrix<double, 6, 1> b = sd.transpose() * r;
      const Eigen::Matrix<double, 6, 1> dp = solve_damped<6>(h6, b, ok);
      if (!ok) break;
      Eigen::Matrix3d inc = Eigen::Matrix3d::Identity();
      inc(0, 0) += dp[2];
      inc(0, 1) = dp[3];
      inc(1, 0) = dp[4];
      inc(1, 1) += dp[5];
      inc(0, 2) = dp[0];
      inc(1, 2) = dp[1];
      m = m * inc.inverse();
      if (dp.norm() < options.step_tolerance) break;
    }
    Eigen::Matrix<double, 2, 3> final_warp = m.topRows<2>();
    // A diverged affine refinement falls back to the translation estimate.
    if (!ok || !final_warp.allFinite() ||
        (final_warp.col(2) - d).norm() > 2.0 ||
        (final_warp.leftCols<2>() - Eigen::Matrix2d::Identity()).norm() > 0.5) {
      final_warp << 1.0, 0.0, d.x(), 0.0, 1.0, d.y();
    }

    const Eigen::VectorXd r = residual(cur_fine, fine, p, final_warp);
    const double energy = fine.values.cwiseAbs().mean();
    res.residual = r.cwiseAbs().mean();
    res.affine = final_warp.leftCols<2>();
    res.position = p + final_warp.col(2);
    res.tracked = energy > 0.0 && inside(res.position) &&
                  res.residual <= options.loss_ratio * energy;
  }
  return results;
}

}  // namespace eventvo
