#pragma once

#include <filesystem>
#include <fstream>

#include <Eigen/Core>

#include "eventvo/geometry.hpp"

namespace eventvo {

/// Gaussian x Beta belief over depth and inlier probability.
struct DepthFilterState {
  double d_mean = 0.0;
  double d_var = 0.0;
  double a = 10.0;
  double b = 10.0;
  double d_min = 0.0;
  double d_max = 0.0;
  int birth_keyframe = 0;
  int updates = 0;
  int clamp_events = 0;  // times d_mean left [d_min, d_max] and was clamped

  double inlier_probability() const { return a / (a + b); }
};

struct DepthMeasurement {
  double d_tilde = 0.0;
  double tau2 = 0.0;
};

// Uniform-prior moments over the range and Beta(10, 10). Throws
// kPrecondition unless 0 <= d_min < d_max.
DepthFilterState init_filter(double d_min, double d_max, int keyframe_id);

// Squared depth change from one pixel of extra disparity. `bearing` is the
// feature's normalized bearing (z = 1) in the reference frame and `depth` its
// z-depth there; T_ref_cur maps current-frame points into the reference
// frame. Infinite when the perturbed rays no longer intersect (bearing along
// the baseline). Throws kDegenerate for a zero baseline and kPrecondition for
// depth <= 0.
double compute_tau2(const PoseSE3& t_ref_cur, const Eigen::Vector3d& bearing,
                    double depth, const CameraIntrinsics& k);

// One Gaussian + uniform mixture update projected back onto Gaussian x Beta
// by matching the first two moments of both factors.
DepthFilterState update(const DepthFilterState& state,
                        const DepthMeasurement& m);

bool has_converged(const DepthFilterState& state, double ratio_threshold);

// CSV trace "update,d_mean,d_var,a,b" of one filter.
class DepthTraceWriter {
 public:
  explicit DepthTraceWriter(const std::filesystem::path& path);
  void record(const DepthFilterState& state);

 private:
  std::ofstream out_;
};

}  // namespace eventvo
