#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "eventvo/bounded_fifo.hpp"
#include "eventvo/config.hpp"
#include "eventvo/depth_filter.hpp"
#include "eventvo/event_io.hpp"
#include "eventvo/global_map.hpp"
#include "eventvo/pose_optimizer.hpp"
#include "eventvo/refinement.hpp"

namespace eventvo {

/// Features observed in one frame, as delivered by a frontend.
struct FrameObservation {
  int frame_id = 0;
  double t = 0.0;
  FeatureObservations features;
  bool is_keyframe = false;
};

// Keyframe every `period` frames, or earlier when fewer than
// `refill_threshold` features are alive.
bool keyframe_due(int frame_index, int live_features, int period,
                  int refill_threshold);

enum class BootstrapStatus { kOk, kTooFewPairs, kLowDisparity, kDegenerate };
const char* to_string(BootstrapStatus status);

struct BootstrapResult {
  BootstrapStatus status = BootstrapStatus::kTooFewPairs;
  PoseSE3 pose1;  // camera-to-world of the second frame; frame 0 is the origin
  std::map<int, Eigen::Vector3d> points;  // world frame
  int pairs = 0;
  double median_disparity = 0.0;
};

// Two-view initialization: eight-point, decomposition, ||t|| = baseline, and
// triangulation of every shared id. Pairs failing parallax or cheirality are
// dropped; the result is deferred rather than thrown for recoverable cases.
BootstrapResult bootstrap(const FeatureObservations& frame0,
                          const FeatureObservations& frame1,
                          const CameraIntrinsics& k, double baseline,
                          double min_disparity);

struct MultiViewBootstrap {
  std::vector<PoseSE3> poses;  // camera-to-world per view, view 0 = identity
  std::map<int, Eigen::Vector3d> points;
  double mean_cost = 0.0;  // Huber cost per observation after refinement
  int hypotheses = 0;
  int seed_view = 0;  // view whose two-view solution won
};

// Bootstrap refinement over every frame since the reference. views[0] is the
// reference and views.back() the frame that passed the two-view checks. Each
// view with at least 8 shared ids and half the disparity threshold seeds an
// eight-point hypothesis on the ids shared by the first and last view; the
// hypothesis is localized over all views, bundle adjusted and scored by its
// mean cost. The winner is scaled to ||t|| = baseline at the last view.
std::optional<MultiViewBootstrap> refine_bootstrap(
    const std::vector<FeatureObservations>& views, const CameraIntrinsics& k,
    const Config& config);

enum class PipelineMode { kAwaitingFirst, kAwaitingSecond, kTracking, kLost };
const char* to_string(PipelineMode mode);

enum class FrameStatus {
  kReference,   // first frame, world origin
  kDeferred,    // bootstrap not possible yet, pose assigned later
  kBootstrap,
  kOptimized,
  kHeld,        // too few map points; pose held at the prediction
  kLost,
  kIgnored,     // arrived after the pipeline was lost
};

struct FrameResult {
  FrameStatus status = FrameStatus::kIgnored;
  std::optional<PoseSE3> pose;  // camera-to-world
  std::optional<OptimizerReport> report;
};

/// One tracked frame handed to the mapping lane.
struct DepthWorkItem {
  int frame_id = 0;
  double t = 0.0;
  PoseSE3 pose;  // camera-to-world
  FeatureObservations features;
  bool is_keyframe = false;
  std::vector<int> new_ids;  // features born at this frame
};

struct DepthStepResult {
  bool processed = false;
  int frame_id = -1;
  int updated = 0;
  int promoted = 0;
  int skipped = 0;   // degenerate or non-finite measurements
  int rejected = 0;  // filters dropped as outliers
};

struct RunReport {
  int frames = 0;
  int keyframes = 0;
  int promotions = 0;
  int bootstrap_points = 0;
  std::size_t queue_drops = 0;
  int stale_features = 0;
  int held_frames = 0;
  int deferred_frames = 0;
  int clamp_events = 0;
  std::optional<int> bootstrap_frame;
  std::optional<int> lost_at;
  PipelineMode final_mode = PipelineMode::kAwaitingFirst;
};

std::string format_run_report(const RunReport& report);

struct PipelineOptions {
  bool deterministic = true;  // single lane: one depth step after each frame
};

class VoPipeline {
 public:
  VoPipeline(const Config& config, PipelineOptions options = {});
  ~VoPipeline();
  VoPipeline(const VoPipeline&) = delete;
  VoPipeline& operator=(const VoPipeline&) = delete;

  FrameResult process(const FrameObservation& frame);
  // Runs one mapping step on the oldest queued frame (no-op when empty).
  DepthStepResult depth_work_step();
  // Drains the queue and stops the mapping lane. Idempotent.
  void finish();

  PipelineMode mode() const { return mode_; }
  const GlobalMap& map() const { return map_; }
  // Poses of all frames that have one, ordered by time.
  std::vector<StampedPose> trajectory() const;
  RunReport report() const;
  // Frame ids in the order the mapping lane consumed them.
  std::vector<int> consumed_frames() const;
  std::size_t queue_size() const { return queue_.size(); }
  std::size_t live_filters() const;

 private:
  struct TrackInfo {
    int birth_frame = 0;
  };
  struct FilterEntry {
    DepthFilterState state;
    PoseSE3 birth_pose;  // camera-to-world
    Eigen::Vector3d bearing;  // z = 1, birth camera frame
    std::vector<PointObservation> sightings;  // birth included
  };

  FrameResult process_awaiting_second(const FrameObservation& frame);
  FrameResult process_tracking(const FrameObservation& frame);
  // Registers frame features; returns ids new at this keyframe.
  std::vector<int> admit_features(const FrameObservation& frame,
                                  FeatureObservations& live);
  void record_pose(int frame_id, double t, const PoseSE3& pose);
  // Bundle adjustment over the last ba_window keyframes; the two oldest stay
  // fixed to hold the gauge and the scale.
  void refine_window();
  void push_work(DepthWorkItem item);
  void worker_loop();
  // Mapping-lane body; caller holds mapping_mutex_.
  DepthStepResult consume(const DepthWorkItem& item);
  std::vector<Observation> map_observations(const FeatureObservations& f) const;

  Config config_;
  CameraIntrinsics camera_;
  PipelineOptions options_;
  OptimizerOptions optimizer_;
  PipelineMode mode_ = PipelineMode::kAwaitingFirst;

  GlobalMap map_;
  BoundedFifo<DepthWorkItem> queue_;

  // Tracking lane.
  std::optional<FrameObservation> reference_;
  std::vector<FrameObservation> deferred_;
  std::map<int, TrackInfo> tracks_;
  std::set<int> dead_;  // ids lost once; reappearances are stale
  std::set<int> previous_ids_;
  PoseSE3 last_pose_;
  std::vector<int> keyframe_ids_;
  std::map<int, StampedPose> poses_;  // by frame id
  RunReport report_;

  // Mapping lane.
  mutable std::mutex mapping_mutex_;
  std::map<int, FilterEntry> filters_;
  std::vector<int> consumed_;
  int promotions_ = 0;
  int clamp_events_ = 0;

  std::thread worker_;
  bool finished_ = false;
};

}  // namespace eventvo
