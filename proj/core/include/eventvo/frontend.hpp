#pragma once

#include <vector>

#include "eventvo/config.hpp"
#include "eventvo/event_io.hpp"
#include "eventvo/feature_tracker.hpp"
#include "eventvo/frame_builder.hpp"
#include "eventvo/harris.hpp"
#include "eventvo/vo_pipeline.hpp"

namespace eventvo {

// Offline replay of a track file: frame k is stamped t_start + k * interval
// and is a keyframe when it introduces feature ids (the recorded tracker
// detected there) or when the keyframe policy says so.
std::vector<FrameObservation> replay_observations(const TrackTable& tracks,
                                                  const Config& config,
                                                  double t_start = 0.0);

// Event-driven frontend: flow-corrected frames, Harris detection on
// keyframes and patch tracking between consecutive corrected frames.
class EventFrontend {
 public:
  explicit EventFrontend(const Config& config);

  FrameObservation process(const EventFrame& frame);

  const Image& last_corrected() const { return prev_corrected_; }
  const std::vector<Feature>& features() const { return features_; }
  // Every observation emitted so far, in the track-file layout.
  const TrackTable& tracks() const { return tracks_; }

 private:
  Config config_;
  CameraIntrinsics camera_;
  TrackerOptions tracker_;
  std::vector<Feature> features_;
  FlowEstimate flow_;
  Image prev_corrected_;
  TrackTable tracks_;
  int next_id_ = 0;
  int frames_ = 0;
};

}  // namespace eventvo
