#include "eventvo/frontend.hpp"

#include <set>

namespace eventvo {

std::vector<FrameObservation> replay_observations(const TrackTable& tracks,
                                                  const Config& config,
                                                  double t_start) {
  std::vector<FrameObservation> out;
  std::set<int> seen;
  int live = 0;
  for (const auto& [frame, observations] : tracks) {
    FrameObservation obs;
    obs.frame_id = frame;
    obs.t = t_start + frame * config.frame_interval;
    obs.features = observations;
    bool fresh = false;
    for (const auto& [id, px] : observations) {
      (void)px;
      fresh |= seen.insert(id).second;
    }
    obs.is_keyframe = fresh || keyframe_due(frame, live, config.keyframe_period,
                                            config.refill_threshold);
    live = static_cast<int>(observations.size());
    out.push_back(std::move(obs));
  }
  return out;
}

EventFrontend::EventFrontend(const Config& config)
    : config_(config), camera_(config.camera()) {
  tracker_.patch_size = config.patch_size;
  tracker_.max_iterations = config.track_max_iterations;
  tracker_.loss_ratio = config.track_loss_ratio;
}

FrameObservation EventFrontend::process(const EventFrame& frame) {
  const double dt = frame.t1 - frame.t0;

  // Feature positions predicted to this frame's start by the previous flow.
  std::vector<Feature> predicted = features_;
  std::vector<Eigen::Vector2d> positions, shifts;
  for (Feature& f : predicted) {
    auto it = flow_.find(f.id);
    const Eigen::Vector2d v =
        it != flow_.end() ? it->second.velocity : Eigen::Vector2d::Zero();
    positions.push_back(f.position);
    shifts.push_back(v * dt);
    f.position += v * dt;
  }

  FlowCorrection correction =
      em_flow_correct(frame, predicted, config_.flow_window, flow_);

  std::vector<Feature> survivors;
  if (!features_.empty() && prev_corrected_.size() > 0) {
    const auto results = track_features(prev_corrected_, correction.corrected,
                                        positions, tracker_, shifts);
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (!results[i].tracked) continue;
      Feature f = features_[i];
      f.position = results[i].position;
      ++f.lifetime;
      survivors.push_back(f);
    }
  }

  FrameObservation obs;
  obs.frame_id = frame.id;
  obs.t = frame.t0;
  obs.is_keyframe = keyframe_due(frames_, static_cast<int>(survivors.size()),
                                 config_.keyframe_period, config_.refill_threshold);
  if (obs.is_keyframe) {
    const auto corners = detect_harris(correction.corrected, config_.max_features,
                                       config_.min_distance);
    const double d2 = config_.min_distance * config_.min_distance;
    for (const Corner& c : corners) {
      if (static_cast<int>(survivors.size()) >= config_.max_features) break;
      bool near = false;
      for (const Feature& f : survivors) {
        if ((f.position - c.position).squaredNorm() <= d2) {
          near = true;
          break;
        }
      }
      if (near) continue;
      Feature f;
      f.id = next_id_++;
      f.position = c.position;
      f.birth_frame = frame.id;
      survivors.push_back(f);
    }
  }

  FlowEstimate next_flow;
  for (const Feature& f : survivors) {
    auto it = correction.flow.find(f.id);
    if (it != correction.flow.end()) next_flow[f.id] = it->second;
    obs.features[f.id] = f.position;
  }
  if (!obs.features.empty()) tracks_[frame.id] = obs.features;

  features_ = std::move(survivors);
  flow_ = std::move(next_flow);
  prev_corrected_ = std::move(correction.corrected);
  ++frames_;
  return obs;
}

}  // namespace eventvo
