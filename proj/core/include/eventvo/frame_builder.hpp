#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eventvo/event_io.hpp"
#include "eventvo/image.hpp"

namespace eventvo {

/// Events over [t0, t1) and their per-pixel counts.
struct EventFrame {
  int id = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Event> events;
  Image accum;  // raw counts, polarity ignored
  bool is_keyframe = false;
};

struct Feature {
  int id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // (u, v)
  int birth_frame = 0;
  int lifetime = 1;  // frames tracked so far, including the birth frame
  std::optional<int> map_point;
};

// Takes the events with t0 <= t < t0 + dt. `events` must be time-sorted;
// throws kPrecondition for dt <= 0.
EventFrame accumulate_frame(std::span<const Event> events, double t0,
                            double dt, int id, int width, int height);

// Splits a sorted stream into consecutive frames of length dt starting at the
// first event's timestamp (or `start` when given).
std::vector<EventFrame> partition_frames(std::span<const Event> events,
                                         double dt, int width, int height,
                                         std::optional<double> start = {});

struct FeatureFlow {
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // pixels / second
  bool reliable = false;
  int events = 0;  // events inside the window
};

using FlowEstimate = std::map<int, FeatureFlow>;  // feature id -> flow

struct EmOptions {
  double sigma_start = 3.0;  // pixels
  double sigma_end = 1.0;
  int anneal_steps = 30;
  int max_refine_iterations = 50;
  double tolerance = 1e-3;   // pixels / second
  int min_events = 5;
  int max_events = 1500;     // deterministic stride subsampling above this
};

// Constant-velocity flow of one spatiotemporal window. Pairwise Gaussian soft
// assignment between propagated events (E-step) alternates with a weighted
// least-squares velocity update (M-step) while the assignment bandwidth is
// annealed from sigma_start to sigma_end, then iterated at sigma_end until the
// update falls below `tolerance`.
Eigen::Vector2d em_window_flow(std::span<const Event> events, double t0,
                               const Eigen::Vector2d& init,
                               const EmOptions& options = {});

// Trace of the coordinate covariance of events propagated to t0 with
// velocity v (x - v (t - t0)). Zero for fewer than two events.
double propagated_variance(std::span<const Event> events, double t0,
                           const Eigen::Vector2d& velocity);

struct FlowCorrection {
  Image corrected;
  FlowEstimate flow;
  // Summed over all windows, before and after propagation.
  double variance_uncorrected = 0.0;
  double variance_corrected = 0.0;
};

// Each event within `window` pixels (Chebyshev, after propagation by the
// initial flow) of a feature is assigned to its nearest feature and moved by
// -v (t - t0) before bilinear accumulation; other events are accumulated at
// their pixel. Windows with fewer than min_events events, or whose estimate
// would increase the window variance, fall back to zero flow and are flagged
// unreliable. Throws kPrecondition for window < 1.
FlowCorrection em_flow_correct(const EventFrame& frame,
                               std::span<const Feature> features, int window,
                               const FlowEstimate& flow_init,
                               const EmOptions& options = {});

}  // namespace eventvo
