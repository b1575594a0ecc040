#include "eventvo/depth_filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "eventvo/error.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "depth_filter";

double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

DepthFilterState init_filter(double d_min, double d_max, int keyframe_id) {
  if (!(d_min >= 0.0) || !(d_max > d_min) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::kPrecondition, kModule,
                "depth range must satisfy 0 <= d_min < d_max");
  }
  DepthFilterState s;
  s.d_min = d_min;
  s.d_max = d_max;
  s.d_mean = 0.5 * (d_min + d_max);
  const double half = 0.5 * (d_max - d_min);
  s.d_var = half * half / 3.0;
  s.birth_keyframe = keyframe_id;
  return s;
}

double compute_tau2(const PoseSE3& t_ref_cur, const Eigen::Vector3d& bearing,
                    double depth, const CameraIntrinsics& k) {
  if (!(depth > 0.0)) {
    throw Error(ErrorCode::kPrecondition, kModule, "depth must be positive");
  }
  const Eigen::Vector3d t = t_ref_cur.translation();
  const double t_norm = t.norm();
  if (!(t_norm > 0.0)) {
    throw Error(ErrorCode::kDegenerate, kModule, "zero baseline");
  }
  const double ray_scale = bearing.norm();
  const Eigen::Vector3d f = bearing / ray_scale;
  const double z = depth * ray_scale;  // distance along the ray
  const Eigen::Vector3d a = f * z - t;
  const double a_norm = a.norm();
  if (!(a_norm > 0.0)) return std::numeric_limits<double>::infinity();

  const double px_angle = 2.0 * std::atan(1.0 / (2.0 * k.fx));
  const double alpha = std::acos(std::clamp(f.dot(t) / t_norm, -1.0, 1.0));
  const double beta =
      std::acos(std::clamp(a.dot(-t) / (t_norm * a_norm), -1.0, 1.0));
  const double beta_plus = beta + px_angle;
  const double gamma_plus = std::numbers::pi - alpha - beta_plus;
  if (!(gamma_plus > 0.0)) return std::numeric_limits<double>::infinity();
  const double z_plus = t_norm * std::sin(beta_plus) / std::sin(gamma_plus);
  const double tau = (z_plus - z) / ray_scale;
  return tau * tau;
}

DepthFilterState update(const DepthFilterState& state,
                        const DepthMeasurement& m) {
  if (!(m.tau2 > 0.0) || !std::isfinite(m.tau2) || !std::isfinite(m.d_tilde)) {
    return state;
  }
  DepthFilterState s = state;
  const double s2 = 1.0 / (1.0 / state.d_var + 1.0 / m.tau2);
  const double mean = s2 * (state.d_mean / state.d_var + m.d_tilde / m.tau2);
  double c1 = state.a / (state.a + state.b) *
              normal_pdf(m.d_tilde, state.d_mean, state.d_var + m.tau2);
  double c2 = state.b / (state.a + state.b) / (state.d_max - state.d_min);
  const double norm = c1 + c2;
  if (!(norm > 0.0)) return state;
  c1 /= norm;
  c2 /= norm;

  const double ab = state.a + state.b;
  const double f = c1 * (state.a + 1.0) / (ab + 1.0) + c2 * state.a / (ab + 1.0);
  const double e = c1 * (state.a + 1.0) * (state.a + 2.0) / ((ab + 1.0) * (ab + 2.0)) +
                   c2 * state.a * (state.a + 1.0) / ((ab + 1.0) * (ab + 2.0));

  const double mu_new = c1 * mean + c2 * state.d_mean;
  const double var_new = c1 * (s2 + mean * mean) +
                          c2 * (state.d_var + state.d_mean * state.d_mean) -
                          mu_new * mu_new;
  s.d_mean = mu_new;
  s.d_var = std::max(var_new, std::numeric_limits<double>::min());
  s.a = (e - f) / (f - e / f);
  s.b = s.a * (1.0 - f) / f;
  ++s.updates;
  if (s.d_mean < s.d_min || s.d_mean > s.d_max) {
    s.d_mean = std::clamp(s.d_mean, s.d_min, s.d_max);
    ++s.clamp_events;
  }
  return s;
}

bool has_converged(const DepthFilterState& state, double ratio_threshold) {
  return std::sqrt(state.d_var) < ratio_threshold * (state.d_max - state.d_min);
}

DepthTraceWriter::DepthTraceWriter(const std::filesystem::path& path)
    : out_(path) {
  if (!out_) throw Error(ErrorCode::kIo, kModule, "cannot write " + path.string());
  out_ << "update,d_mean,d_var,a,b\n";
}

void DepthTraceWriter::record(const DepthFilterState& state) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g\n", state.updates,
                state.d_mean, state.d_var, state.a, state.b);
  out_ << buf;
}

}  // namespace eventvo
