#include "eventvo/frame_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eventvo/error.hpp"

namespace eventvo {

namespace {

constexpr const char* kModule = "frame_builder";

// Events with t0 <= t < t1. Adjacent frames pass the same boundary value so
// that no event lands in two frames.
EventFrame accumulate_between(std::span<const Event> events, double t0, double t1,
                              int id, int width, int height) {
  EventFrame frame;
  frame.id = id;
  frame.t0 = t0;
  frame.t1 = t1;
  frame.accum = Image::Zero(height, width);
  auto first = std::lower_bound(
      events.begin(), events.end(), t0,
      [](const Event& e, double t) { return e.t < t; });
  for (auto it = first; it != events.end() && it->t < t1; ++it) {
    frame.events.push_back(*it);
    if (it->x >= 0 && it->x < width && it->y >= 0 && it->y < height) {
      frame.accum(it->y, it->x) += 1.0;
    }
  }
  return frame;
}

}  // namespace

EventFrame accumulate_frame(std::span<const Event> events, double t0,
                            double dt, int id, int width, int height) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kPrecondition, kModule, "frame interval must be positive");
  }
  return accumulate_between(events, t0, t0 + dt, id, width, height);
}

std::vector<EventFrame> partition_frames(std::span<const Event> events,
                                         double dt, int width, int height,
                                         std::optional<double> start) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kPrecondition, kModule, "frame interval must be positive");
  }
  std::vector<EventFrame> frames;
  if (events.empty()) return frames;
  const double begin = start.value_or(events.front().t);
  const double end = events.back().t;
  for (int id = 0;; ++id) {
    // Multiplying instead of accumulating keeps boundaries drift-free.
    const double t0 = begin + id * dt;
    if (t0 > end) break;
    frames.push_back(
        accumulate_between(events, t0, begin + (id + 1) * dt, id, width, height));
  }
  return frames;
}

Eigen::Vector2d em_window_flow(std::span<const Event> events, double t0,
                               const Eigen::Vector2d& init,
                               const EmOptions& options) {
  std::vector<Event> sample;
  if (static_cast<int>(events.size()) > options.max_events) {
    const double stride =
        static_cast<double>(events.size()) / options.max_events;
    for (int i = 0; i < options.max_events; ++i) {
      sample.push_back(events[static_cast<std::size_t>(i * stride)]);
    }
  } else {
    sample.assign(events.begin(), events.end());
  }
  const std::size_t n = sample.size();
  if (n < 2) return init;

  std::vector<double> t(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = sample[i].t - t0;
    x[i] = sample[i].x;
    y[i] = sample[i].y;
  }

  std::vector<double> px(n), py(n), row(n);
  auto iterate = [&](const Eigen::Vector2d& v, double sigma) {
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = x[i] - v.x() * t[i];
      py[i] = y[i] - v.y() * t[i];
    }
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double cutoff = 16.0 * sigma * sigma;
    double num_x = 0.0, num_y = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double norm = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = 0.0;
        if (j == i) continue;
        const double dx = px[i] - px[j];
        const double dy = py[i] - py[j];
        const double d2 = dx * dx + dy * dy;
        if (d2 > cutoff) continue;
        row[j] = std::exp(-d2 * inv2s2);
        norm += row[j];
      }
      if (norm <= 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (row[j] == 0.0) continue;
        const double r = row[j] / norm;
        const double dt = t[i] - t[j];
        num_x += r * dt * (x[i] - x[j]);
        num_y += r * dt * (y[i] - y[j]);
        den += r * dt * dt;
      }
    }
    if (den <= std::numeric_limits<double>::min()) return v;
    return Eigen::Vector2d(num_x / den, num_y / den);
  };

  Eigen::Vector2d v = init;
  const int steps = std::max(1, options.anneal_steps);
  const double ratio =
      steps > 1 ? std::pow(options.sigma_end / options.sigma_start,
                           1.0 / (steps - 1))
                : 1.0;
  double sigma = options.sigma_start;
  for (int k = 0; k < steps; ++k, sigma *= ratio) v = iterate(v, sigma);
  for (int k = 0; k < options.max_refine_iterations; ++k) {
    const Eigen::Vector2d next = iterate(v, options.sigma_end);
    const double change = (next - v).norm();
    v = next;
    if (change < options.tolerance) break;
  }
  if (!v.allFinite()) return init;
  return v;
}

double propagated_variance(std::span<const Event> events, double t0,
                           const Eigen::Vector2d& velocity) {
  if (events.size() < 2) return 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d sq = Eigen::Vector2d::Zero();
  for (const Event& e : events) {
    const Eigen::Vector2d p =
        Eigen::Vector2d(e.x, e.y) - velocity * (e.t - t0);
    mean += p;
    sq += p.cwiseProduct(p);
  }
  const double n = static_cast<double>(events.size());
  mean /= n;
  return (sq / n - mean.cwiseProduct(mean)).sum();
}

FlowCorrection em_flow_correct(const EventFrame& frame,
                               std::span<const Feature> features, int window,
                               const FlowEstimate& flow_init,
                               const EmOptions& options) {
  if (window < 1) {
    throw Error(ErrorCode::kPrecondition, kModule, "flow window must be >= 1");
  }
  FlowCorrection out;
  out.corrected = Image::Zero(frame.accum.rows(), frame.accum.cols());

  auto init_of = [&](int id) -> Eigen::Vector2d {
    auto it = flow_init.find(id);
    return it == flow_init.end() ? Eigen::Vector2d::Zero()
                                 : it->second.velocity;
  };

  // Nearest-feature window assignment; -1 means unassigned.
  std::vector<int> owner(frame.events.size(), -1);
  std::vector<std::vector<Event>> members(features.size());
  for (std::size_t k = 0; k < frame.events.size(); ++k) {
    const Event& e = frame.events[k];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < features.size(); ++f) {
      const Eigen::Vector2d p = Eigen::Vector2d(e.x, e.y) -
                                init_of(features[f].id) * (e.t - frame.t0);
      const Eigen::Vector2d d = p - features[f].position;
      if (d.cwiseAbs().maxCoeff() > window) continue;
      const double dist = d.squaredNorm();
      if (dist < best) {
        best = dist;
        owner[k] = static_cast<int>(f);
      }
    }
    if (owner[k] >= 0) members[owner[k]].push_back(e);
  }

  std::vector<Eigen::Vector2d> velocity(features.size(),
                                        Eigen::Vector2d::Zero());
  for (std::size_t f = 0; f < features.size(); ++f) {
    FeatureFlow flow;
    flow.events = static_cast<int>(members[f].size());
    const double raw = propagated_variance(members[f], frame.t0,
                                           Eigen::Vector2d::Zero());
    out.variance_uncorrected += raw;
    if (flow.events < options.min_events) {
      out.variance_corrected += raw;
      out.flow[features[f].id] = flow;
      continue;
    }
    const Eigen::Vector2d v =
        em_window_flow(members[f], frame.t0, init_of(features[f].id), options);
    const double corrected = propagated_variance(members[f], frame.t0, v);
    if (corrected <= raw) {
      flow.velocity = v;
      flow.reliable = true;
      out.variance_corrected += corrected;
    } else {
      out.variance_corrected += raw;
    }
    velocity[f] = flow.velocity;
    out.flow[features[f].id] = flow;
  }

  for (std::size_t k = 0; k < frame.events.size(); ++k) {
    const Event& e = frame.events[k];
    if (owner[k] < 0) {
      if (e.x >= 0 && e.y >= 0 && e.x < out.corrected.cols() &&
          e.y < out.corrected.rows()) {
        out.corrected(e.y, e.x) += 1.0;
      }
      continue;
    }
    // Nearest pixel keeps the corrected frame a per-pixel event count; a
    // bilinear splat would blur by about as much as one frame of motion.
    const Eigen::Vector2d p =
        Eigen::Vector2d(e.x, e.y) - velocity[owner[k]] * (e.t - frame.t0);
    const long x = std::lround(p.x());
    const long y = std::lround(p.y());
    if (x >= 0 && y >= 0 && x < out.corrected.cols() && y < out.corrected.rows()) {
      out.corrected(y, x) += 1.0;
    }
  }
  return out;
}

}  // namespace eventvo
