#include "eventvo/vo_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eventvo/error.hpp"
#include "eventvo/logging.hpp"
#include "eventvo/refinement.hpp"
#include "eventvo/two_view.hpp"

namespace eventvo {

namespace {
constexpr const char* kModule = "vo_pipeline";
}  // namespace

bool keyframe_due(int frame_index, int live_features, int period,
                  int refill_threshold) {
  if (period > 0 && frame_index % period == 0) return true;
  return live_features < refill_threshold;
}

const char* to_string(BootstrapStatus status) {
  switch (status) {
    case BootstrapStatus::kOk: return "ok";
    case BootstrapStatus::kTooFewPairs: return "too-few-pairs";
    case BootstrapStatus::kLowDisparity: return "low-disparity";
    case BootstrapStatus::kDegenerate: return "degenerate";
  }
  return "unknown";
}

std::optional<MultiViewBootstrap> refine_bootstrap(
    const std::vector<FeatureObservations>& views, const CameraIntrinsics& k,
    const Config& config) {
  if (views.size() < 2) return std::nullopt;
  OptimizerOptions opt;
  opt.max_iterations = config.gn_max_iterations;
  opt.tolerance = config.gn_step_tolerance;
  opt.huber_delta = config.huber_delta;
  const FeatureObservations& first = views.front();
  const FeatureObservations& last = views.back();
  std::vector<int> shared;
  for (const auto& [id, px] : first) {
    (void)px;
    if (last.count(id)) shared.push_back(id);
  }
  if (shared.size() < 8) return std::nullopt;

  std::optional<MultiViewBootstrap> best;
  for (std::size_t s = 1; s < views.size(); ++s) {
    std::vector<int> ids;
    std::vector<Eigen::Vector3d> x0, x1;
    std::vector<double> disparity;
    for (int id : shared) {
      auto it = views[s].find(id);
      if (it == views[s].end()) continue;
      ids.push_back(id);
      x0.push_back(k.bearing(first.at(id)));
      x1.push_back(k.bearing(it->second));
      disparity.push_back((it->second - first.at(id)).norm());
    }
    if (ids.size() < 8) continue;
    auto mid = disparity.begin() + static_cast<std::ptrdiff_t>(disparity.size() / 2);
    std::nth_element(disparity.begin(), mid, disparity.end());
    if (*mid < 0.5 * config.bootstrap_min_disparity) continue;

    RelativePose rel;
    try {
      rel = decompose_essential(eight_point(x0, x1), x0, x1);
    } catch (const Error&) {
      continue;
    }
    std::map<int, Eigen::Vector3d> points;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      try {
        points[ids[i]] = triangulate(x0[i], x1[i], rel.rotation, rel.translation).z1 * x0[i];
      } catch (const Error&) {
      }
    }
    if (points.size() < 8) continue;

    // Localize every view against the hypothesis, then refine jointly.
    BundleProblem problem;
    problem.poses.push_back(PoseSE3::identity());
    problem.fixed.push_back(true);
    PoseSE3 t_cw = PoseSE3::identity();
    for (std::size_t v = 1; v < views.size(); ++v) {
      if (v == s) {
        t_cw = PoseSE3(rel.rotation, rel.translation);
      } else {
        std::vector<Observation> obs;
        for (const auto& [id, px] : views[v]) {
          auto it = points.find(id);
          if (it != points.end()) obs.push_back({px, it->second, 1.0});
        }
        try {
          t_cw = optimize_pose(t_cw, obs, k, opt).pose;
        } catch (const Error&) {
        }
      }
      problem.poses.push_back(t_cw);
      problem.fixed.push_back(false);
    }
    std::vector<int> point_ids;
    std::map<int, int> index;
    for (const auto& [id, p] : points) {
      index[id] = static_cast<int>(point_ids.size());
      point_ids.push_back(id);
      problem.points.push_back(p);
    }
    for (std::size_t v = 0; v < views.size(); ++v) {
      for (const auto& [id, px] : views[v]) {
        auto it = index.find(id);
        if (it != index.end()) {
          problem.observations.push_back({static_cast<int>(v), it->second, px});
        }
      }
    }
    BundleOptions ba;
    ba.max_iterations = 5 * config.ba_iterations;
    ba.huber_delta = config.huber_delta;
    bundle_adjust(problem, k, ba);

    // Hypotheses triangulate different subsets, so they are compared on every
    // shared id re-triangulated from the refined poses. A two-view failure
    // starts from the median depth; an id that still cannot be placed is
    // charged a fixed 3-delta residual per observation.
    const double penalty = huber_cost(3.0 * config.huber_delta, config.huber_delta);
    std::vector<double> depths;
    for (const auto& p : problem.points) depths.push_back(p.z());
    auto dmid = depths.begin() + static_cast<std::ptrdiff_t>(depths.size() / 2);
    std::nth_element(depths.begin(), dmid, depths.end());
    const double median_depth = *dmid;
    std::map<int, Eigen::Vector3d> all;
    double score = 0.0;
    std::size_t n_obs = 0;
    const PoseSE3& last_cw = problem.poses.back();
    for (int id : shared) {
      std::vector<PointObservation> sightings;
      for (std::size_t v = 0; v < views.size(); ++v) {
        auto it = views[v].find(id);
        if (it != views[v].end()) sightings.push_back({problem.poses[v], it->second});
      }
      n_obs += sightings.size();
      const Eigen::Vector3d b0 = k.bearing(first.at(id));
      double z = median_depth;
      try {
        z = triangulate(b0, k.bearing(last.at(id)), last_cw.rotation(),
                        last_cw.translation()).z1;
      } catch (const Error&) {
      }
      const auto p = refine_point(z * b0, sightings, k);
      if (!p) {
        score += penalty * static_cast<double>(sightings.size());
        continue;
      }
      for (const auto& o : sightings) {
        score += huber_cost((project(o.t_cw * *p, k) - o.pixel).norm(), config.huber_delta);
      }
      all[id] = *p;
    }
    if (all.size() < 8) continue;
    const double mean_cost = score / static_cast<double>(n_obs);
    if (!std::isfinite(mean_cost)) continue;
    if (best && mean_cost >= best->mean_cost) {
      ++best->hypotheses;
      continue;
    }
    MultiViewBootstrap result;
    result.hypotheses = best ? best->hypotheses + 1 : 1;
    result.seed_view = static_cast<int>(s);
    result.mean_cost = mean_cost;
    result.poses = std::move(problem.poses);  // world-to-camera until the end
    result.points = std::move(all);
    best = std::move(result);
  }
  if (!best) return best;

  BundleProblem problem;
  problem.poses = best->poses;
  problem.fixed.assign(problem.poses.size(), false);
  problem.fixed.front() = true;
  std::vector<int> point_ids;
  std::map<int, int> index;
  for (const auto& [id, p] : best->points) {
    index[id] = static_cast<int>(point_ids.size());
    point_ids.push_back(id);
    problem.points.push_back(p);
  }
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (const auto& [id, px] : views[v]) {
      auto it = index.find(id);
      if (it != index.end()) {
        problem.observations.push_back({static_cast<int>(v), it->second, px});
      }
    }
  }
  BundleOptions ba;
  ba.max_iterations = 5 * config.ba_iterations;
  ba.huber_delta = config.huber_delta;
  bundle_adjust(problem, k, ba);
  const double norm = problem.poses.back().inverse().translation().norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) return std::nullopt;
  const double scale = config.bootstrap_baseline / norm;
  best->poses.clear();
  for (const PoseSE3& pose : problem.poses) {
    const PoseSE3 t_wc = pose.inverse();
    best->poses.emplace_back(t_wc.rotation(), scale * t_wc.translation());
  }
  for (std::size_t j = 0; j < point_ids.size(); ++j) {
    best->points[point_ids[j]] = scale * problem.points[j];
  }
  return best;
}

const char* to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::kAwaitingFirst: return "awaiting-first-frame";
    case PipelineMode::kAwaitingSecond: return "awaiting-second-frame";
    case PipelineMode::kTracking: return "tracking";
    case PipelineMode::kLost: return "lost";
  }
  return "unknown";
}

BootstrapResult bootstrap(const FeatureObservations& frame0,
                          const FeatureObservations& frame1,
                          const CameraIntrinsics& k, double baseline,
                          double min_disparity) {
  BootstrapResult result;
  std::vector<int> ids;
  std::vector<Eigen::Vector3d> x0, x1;
  std::vector<double> disparity;
  for (const auto& [id, p0] : frame0) {
    auto it = frame1.find(id);
    if (it == frame1.end()) continue;
    ids.push_back(id);
    x0.push_back(k.bearing(p0));
    x1.push_back(k.bearing(it->second));
    disparity.push_back((it->second - p0).norm());
  }
  result.pairs = static_cast<int>(ids.size());
  if (ids.size() < 8) return result;

  auto mid = disparity.begin() + static_cast<std::ptrdiff_t>(disparity.size() / 2);
  std::nth_element(disparity.begin(), mid, disparity.end());
  result.median_disparity = *mid;
  if (result.median_disparity < min_disparity) {
    result.status = BootstrapStatus::kLowDisparity;
    return result;
  }

  RelativePose rel;
  try {
    rel = decompose_essential(eight_point(x0, x1), x0, x1);
  } catch (const Error& e) {
    log::info(kModule, "bootstrap deferred: ", e.what());
    result.status = BootstrapStatus::kDegenerate;
    return result;
  }
  const Eigen::Vector3d t = baseline * rel.translation;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    try {
      const Triangulation tri = triangulate(x0[i], x1[i], rel.rotation, t);
      result.points[ids[i]] = tri.z1 * x0[i];
    } catch (const Error&) {
      // parallax or cheirality failure: the pair is dropped
    }
  }
  if (result.points.size() < 8) {
    result.status = BootstrapStatus::kDegenerate;
    result.points.clear();
    return result;
  }
  result.pose1 = PoseSE3(rel.rotation, t).inverse();
  result.status = BootstrapStatus::kOk;
  return result;
}

std::string format_run_report(const RunReport& r) {
  std::ostringstream os;
  os << "frames: " << r.frames << '\n'
     << "keyframes: " << r.keyframes << '\n'
     << "bootstrap_frame: "
     << (r.bootstrap_frame ? std::to_string(*r.bootstrap_frame) : "none") << '\n'
     << "bootstrap_points: " << r.bootstrap_points << '\n'
     << "deferred_frames: " << r.deferred_frames << '\n'
     << "promotions: " << r.promotions << '\n'
     << "held_frames: " << r.held_frames << '\n'
     << "queue_drops: " << r.queue_drops << '\n'
     << "stale_features: " << r.stale_features << '\n'
     << "clamp_events: " << r.clamp_events << '\n'
     << "lost_at: " << (r.lost_at ? std::to_string(*r.lost_at) : "none") << '\n'
     << "final_mode: " << to_string(r.final_mode) << '\n';
  return os.str();
}

VoPipeline::VoPipeline(const Config& config, PipelineOptions options)
    : config_(config),
      camera_(config.camera()),
      options_(options),
      queue_(static_cast<std::size_t>(config.queue_capacity)) {
  config_.validate();
  optimizer_.max_iterations = config.gn_max_iterations;
  optimizer_.tolerance = config.gn_step_tolerance;
  optimizer_.huber_delta = config.huber_delta;
  if (!options_.deterministic) worker_ = std::thread([this] { worker_loop(); });
}

VoPipeline::~VoPipeline() { finish(); }

FrameResult VoPipeline::process(const FrameObservation& frame) {
  if (mode_ == PipelineMode::kLost) return {FrameStatus::kIgnored, {}, {}};
  if (finished_) {
    throw Error(ErrorCode::kPrecondition, kModule, "pipeline already finished");
  }
  ++report_.frames;

  if (mode_ == PipelineMode::kAwaitingFirst) {
    reference_ = frame;
    for (const auto& [id, px] : frame.features) {
      (void)px;
      tracks_[id] = {frame.frame_id};
    }
    previous_ids_.clear();
    for (const auto& [id, px] : frame.features) {
      (void)px;
      previous_ids_.insert(id);
    }
    record_pose(frame.frame_id, frame.t, PoseSE3::identity());
    map_.add_keyframe({frame.frame_id, PoseSE3::identity(), frame.features});
    keyframe_ids_.push_back(frame.frame_id);
    ++report_.keyframes;
    mode_ = PipelineMode::kAwaitingSecond;
    return {FrameStatus::kReference, PoseSE3::identity(), {}};
  }
  if (mode_ == PipelineMode::kAwaitingSecond) return process_awaiting_second(frame);
  return process_tracking(frame);
}

FrameResult VoPipeline::process_awaiting_second(const FrameObservation& frame) {
  const BootstrapResult boot =
      bootstrap(reference_->features, frame.features, camera_,
                config_.bootstrap_baseline, config_.bootstrap_min_disparity);
  if (boot.status != BootstrapStatus::kOk) {
    log::debug(kModule, "frame ", frame.frame_id, " bootstrap deferred (",
               to_string(boot.status), ", ", boot.pairs, " pairs)");
    deferred_.push_back(frame);
    ++report_.deferred_frames;
    return {FrameStatus::kDeferred, {}, {}};
  }

  std::map<int, Eigen::Vector3d> points = boot.points;
  PoseSE3 pose1 = boot.pose1;
  std::vector<PoseSE3> deferred_poses;
  std::optional<MultiViewBootstrap> refined;
  if (config_.ba_window > 0) {
    // Every frame since the reference observes the bootstrap points; a joint
    // refinement removes most of the two-view error before tracking starts.
    std::vector<FeatureObservations> views{reference_->features};
    for (const auto& d : deferred_) views.push_back(d.features);
    views.push_back(frame.features);
    refined = refine_bootstrap(views, camera_, config_);
  }
  if (refined) {
    log::debug(kModule, "bootstrap refined from view ", refined->seed_view, " of ",
               refined->hypotheses, " hypotheses, mean cost ", refined->mean_cost);
    points = refined->points;
    pose1 = refined->poses.back();
    deferred_poses.assign(refined->poses.begin() + 1, refined->poses.end() - 1);
  }

  std::vector<std::pair<int, Eigen::Vector3d>> batch(points.begin(), points.end());
  report_.bootstrap_points = static_cast<int>(map_.add_points(batch));
  report_.bootstrap_frame = frame.frame_id;

  if (!refined) {
    // Frames between the reference and the bootstrap frame are localized
    // against the fresh map; too few points holds the previous pose.
    PoseSE3 pose = PoseSE3::identity();
    for (const FrameObservation& d : deferred_) {
      const auto obs = map_observations(d.features);
      if (static_cast<int>(obs.size()) >= config_.min_tracked_features) {
        try {
          pose = optimize_pose(pose.inverse(), obs, camera_, optimizer_).pose.inverse();
        } catch (const Error& e) {
          log::warn(kModule, "deferred frame ", d.frame_id, ": ", e.what());
        }
      }
      deferred_poses.push_back(pose);
    }
  }
  for (std::size_t i = 0; i < deferred_.size(); ++i) {
    record_pose(deferred_[i].frame_id, deferred_[i].t, deferred_poses[i]);
  }
  deferred_.clear();
  map_.add_keyframe({frame.frame_id, pose1, frame.features});
  keyframe_ids_.push_back(frame.frame_id);
  ++report_.keyframes;

  // Every feature of the bootstrap frame without a map point gets a filter.
  DepthWorkItem item;
  item.frame_id = frame.frame_id;
  item.t = frame.t;
  item.pose = pose1;
  item.features = frame.features;
  item.is_keyframe = true;
  previous_ids_.clear();
  for (const auto& [id, px] : frame.features) {
    (void)px;
    if (!tracks_.count(id)) tracks_[id] = {frame.frame_id};
    previous_ids_.insert(id);
    if (!points.count(id)) item.new_ids.push_back(id);
  }
  for (const auto& [id, info] : tracks_) {
    (void)info;
    if (!previous_ids_.count(id)) dead_.insert(id);
  }

  last_pose_ = pose1;
  record_pose(frame.frame_id, frame.t, pose1);
  mode_ = PipelineMode::kTracking;
  push_work(std::move(item));
  return {FrameStatus::kBootstrap, pose1, {}};
}

std::vector<int> VoPipeline::admit_features(const FrameObservation& frame,
                                            FeatureObservations& live) {
  std::vector<int> new_ids;
  std::set<int> seen;
  for (const auto& [id, px] : frame.features) {
    if (previous_ids_.count(id)) {
      live.emplace(id, px);
    } else if (frame.is_keyframe && !tracks_.count(id)) {
      tracks_[id] = {frame.frame_id};
      live.emplace(id, px);
      new_ids.push_back(id);
    } else {
      ++report_.stale_features;
      continue;
    }
    seen.insert(id);
  }
  for (int id : previous_ids_) {
    if (!seen.count(id)) dead_.insert(id);
  }
  previous_ids_ = std::move(seen);
  return new_ids;
}

FrameResult VoPipeline::process_tracking(const FrameObservation& frame) {
  FeatureObservations live;
  std::vector<int> new_ids = admit_features(frame, live);

  if (static_cast<int>(live.size()) < config_.min_tracked_features) {
    mode_ = PipelineMode::kLost;
    report_.lost_at = frame.frame_id;
    log::warn(kModule, "tracking lost at frame ", frame.frame_id, ": ",
              live.size(), " features");
    return {FrameStatus::kLost, {}, {}};
  }

  FrameResult result;
  const auto obs = map_observations(live);
  if (static_cast<int>(obs.size()) >= config_.min_tracked_features) {
    try {
      OptimizerResult opt =
          optimize_pose(last_pose_.inverse(), obs, camera_, optimizer_);
      result.pose = opt.pose.inverse();
      result.report = opt.report;
      result.status = FrameStatus::kOptimized;
    } catch (const Error& e) {
      mode_ = PipelineMode::kLost;
      report_.lost_at = frame.frame_id;
      log::warn(kModule, "tracking lost at frame ", frame.frame_id, ": ", e.what());
      return {FrameStatus::kLost, {}, {}};
    }
  } else {
    result.pose = last_pose_;
    result.status = FrameStatus::kHeld;
    ++report_.held_frames;
  }

  last_pose_ = *result.pose;
  record_pose(frame.frame_id, frame.t, last_pose_);
  if (frame.is_keyframe) {
    map_.add_keyframe({frame.frame_id, last_pose_, live});
    keyframe_ids_.push_back(frame.frame_id);
    ++report_.keyframes;
    refine_window();
    result.pose = last_pose_;
  }

  DepthWorkItem item;
  item.frame_id = frame.frame_id;
  item.t = frame.t;
  item.pose = last_pose_;
  item.features = std::move(live);
  item.is_keyframe = frame.is_keyframe;
  item.new_ids = std::move(new_ids);
  push_work(std::move(item));
  return result;
}

std::vector<Observation> VoPipeline::map_observations(
    const FeatureObservations& features) const {
  std::vector<Observation> obs;
  for (const auto& [id, px] : features) {
    if (auto p = map_.point(id)) obs.push_back({px, *p, 1.0});
  }
  return obs;
}

void VoPipeline::record_pose(int frame_id, double t, const PoseSE3& pose) {
  poses_[frame_id] = {t, pose};
}

void VoPipeline::refine_window() {
  if (config_.ba_window < 3 || keyframe_ids_.size() < 3) return;
  const std::size_t n =
      std::min(keyframe_ids_.size(), static_cast<std::size_t>(config_.ba_window));
  std::vector<Keyframe> window;
  for (std::size_t i = keyframe_ids_.size() - n; i < keyframe_ids_.size(); ++i) {
    if (auto kf = map_.keyframe(keyframe_ids_[i])) window.push_back(std::move(*kf));
  }
  if (window.size() < 3) return;

  std::map<int, int> seen;
  for (const auto& kf : window) {
    for (const auto& [id, px] : kf.features) {
      (void)px;
      ++seen[id];
    }
  }
  const auto points = map_.points();
  BundleProblem problem;
  std::vector<int> ids;
  std::map<int, int> index;
  for (const auto& [id, count] : seen) {
    auto it = points.find(id);
    if (count < 2 || it == points.end()) continue;
    index[id] = static_cast<int>(ids.size());
    ids.push_back(id);
    problem.points.push_back(it->second);
  }
  if (ids.empty()) return;
  for (std::size_t v = 0; v < window.size(); ++v) {
    problem.poses.push_back(window[v].pose.inverse());
    problem.fixed.push_back(v < 2);
    for (const auto& [id, px] : window[v].features) {
      auto it = index.find(id);
      if (it != index.end()) {
        problem.observations.push_back({static_cast<int>(v), it->second, px});
      }
    }
  }
  bundle_adjust(problem, camera_,
                {config_.ba_iterations, config_.huber_delta, optimizer_.initial_lambda});

  std::vector<std::pair<int, Eigen::Vector3d>> refined;
  for (std::size_t j = 0; j < ids.size(); ++j) refined.emplace_back(ids[j], problem.points[j]);
  map_.update_points(refined);
  for (std::size_t v = 2; v < window.size(); ++v) {
    const PoseSE3 t_wc = problem.poses[v].inverse();
    map_.set_keyframe_pose(window[v].frame_id, t_wc);
    auto it = poses_.find(window[v].frame_id);
    if (it != poses_.end()) it->second.pose = t_wc;
  }
  last_pose_ = problem.poses.back().inverse();
}

void VoPipeline::push_work(DepthWorkItem item) {
  if (queue_.push(std::move(item))) {
    log::warn(kModule, "depth queue full, dropped the oldest pending frame");
  }
  if (options_.deterministic) depth_work_step();
}

DepthStepResult VoPipeline::depth_work_step() {
  std::lock_guard lock(mapping_mutex_);
  auto next = queue_.try_pop();
  if (!next) return {};
  return consume(*next);
}

DepthStepResult VoPipeline::consume(const DepthWorkItem& item) {
  DepthStepResult result;
  result.processed = true;
  result.frame_id = item.frame_id;
  consumed_.push_back(item.frame_id);

  if (item.is_keyframe) {
    for (int id : item.new_ids) {
      auto it = item.features.find(id);
      if (it == item.features.end()) continue;
      FilterEntry entry{init_filter(config_.depth_min, config_.depth_max, item.frame_id),
                        item.pose, camera_.bearing(it->second),
                        {{item.pose.inverse(), it->second}}};
      filters_.insert_or_assign(id, entry);
    }
  }

  std::vector<std::pair<int, Eigen::Vector3d>> promote;
  for (auto it = filters_.begin(); it != filters_.end();) {
    FilterEntry& f = it->second;
    const int id = it->first;
    auto px = item.features.find(id);
    if (px == item.features.end()) {
      // The track ended; its filter can never be updated again.
      it = filters_.erase(it);
      continue;
    }
    if (f.state.birth_keyframe == item.frame_id) {
      ++it;
      continue;
    }
    f.sightings.push_back({item.pose.inverse(), px->second});
    const PoseSE3 cur_from_birth = item.pose.inverse() * f.birth_pose;
    const Eigen::Vector3d x2 = camera_.bearing(px->second);
    double z1 = 0.0, tau2 = 0.0;
    try {
      const Triangulation tri = triangulate(f.bearing, x2, cur_from_birth.rotation(),
                                            cur_from_birth.translation());
      if (tri.parallax < config_.depth_min_parallax / camera_.fx) {
        ++result.skipped;
        ++it;
        continue;
      }
      z1 = tri.z1;
      tau2 = compute_tau2(cur_from_birth.inverse(), f.bearing,
                          f.state.updates > 0 ? f.state.d_mean : z1, camera_);
    } catch (const Error&) {
      ++result.skipped;
      ++it;
      continue;
    }
    if (!std::isfinite(tau2) || !(tau2 > 0.0)) {
      ++result.skipped;
      ++it;
      continue;
    }
    const int clamps = f.state.clamp_events;
    f.state = update(f.state, {z1, tau2});
    clamp_events_ += f.state.clamp_events - clamps;
    ++result.updated;
    if (f.state.inlier_probability() < config_.depth_outlier_ratio) {
      ++result.rejected;
      it = filters_.erase(it);
      continue;
    }
    if (has_converged(f.state, config_.depth_convergence_ratio)) {
      // The filter fixes the birth ray; re-triangulating over every
      // sighting averages out the noise of the birth pixel.
      const Eigen::Vector3d seed = f.birth_pose * (f.bearing * f.state.d_mean);
      promote.emplace_back(id, refine_point(seed, f.sightings, camera_).value_or(seed));
      it = filters_.erase(it);
      continue;
    }
    ++it;
  }
  if (!promote.empty()) {
    result.promoted = static_cast<int>(map_.add_points(promote));
    promotions_ += result.promoted;
  }
  return result;
}

void VoPipeline::worker_loop() {
  while (auto item = queue_.pop_wait()) {
    std::lock_guard lock(mapping_mutex_);
    consume(*item);
  }
}

void VoPipeline::finish() {
  if (finished_) return;
  finished_ = true;
  queue_.close();
  if (worker_.joinable()) worker_.join();
  while (depth_work_step().processed) {
  }
}

std::vector<StampedPose> VoPipeline::trajectory() const {
  std::vector<StampedPose> out;
  out.reserve(poses_.size());
  for (const auto& [id, p] : poses_) {
    (void)id;
    out.push_back(p);
  }
  return out;
}

RunReport VoPipeline::report() const {
  RunReport r = report_;
  std::lock_guard lock(mapping_mutex_);
  r.promotions = promotions_;
  r.clamp_events = clamp_events_;
  r.queue_drops = queue_.dropped();
  r.final_mode = mode_;
  return r;
}

std::vector<int> VoPipeline::consumed_frames() const {
  std::lock_guard lock(mapping_mutex_);
  return consumed_;
}

std::size_t VoPipeline::live_filters() const {
  std::lock_guard lock(mapping_mutex_);
  return filters_.size();
}

}  // namespace eventvo
