#pragma once

#include <span>
#include <string>
#include <vector>

#include "base/association.hpp"
#include "base/detector_model.hpp"
#include "base/geometry.hpp"
#include "base/motion.hpp"
#include "base/track_management.hpp"

namespace base {

enum class AssocStrategy { Probabilistic, Iou, Traditional };
enum class ClutterMode { Dynamic, Constant };

struct TrackerConfig {
  MotionParams motion;
  ManageParams manage;
  double p_g = 1e-3;
  double detection_threshold = 0.1;
  int lookahead_frames = 30;  // -1: unlimited window
  int max_interp_gap = 20;

  AssocStrategy assoc = AssocStrategy::Probabilistic;
  ClutterMode clutter = ClutterMode::Dynamic;
  // Constant clutter density; < 0 derives it from the clutter model mean.
  double constant_lambda_override = -1.0;
  ConfidenceMode confidence = ConfidenceMode::Calibrated;
  double iou_gate = 0.1;
  bool renormalize_after_gate = false;
  bool parallel_assoc = true;
};

struct ReportedBox {
  int frame = 0;
  int track_id = 0;
  BoundingBox box;
  double confidence = 0.0;  // min(1, LR / 100)
  bool interpolated = false;
};

struct FrameDiagnostics {
  int frame = 0;
  int n_tracks_in = 0;
  int n_dets = 0;
  int n_dets_dropped = 0;
  int n_matched = 0;
  int n_spawned = 0;
  int n_confirmed = 0;
  bool cmc_rejected = false;
  double wall_ms = 0.0;
};

struct SequenceResult {
  std::vector<ReportedBox> boxes;  // sorted by (frame, track_id)
  std::vector<FrameDiagnostics> diagnostics;
};

// Single-hypothesis frame loop: predict, gate, associate, update, manage.
// One instance per sequence; frames must arrive in increasing order.
class Tracker {
 public:
  Tracker(const TrackerConfig& cfg, const ConfidenceModel* conf_model = nullptr,
          const ClutterModel* clutter_model = nullptr);

  FrameDiagnostics step(const FrameData& frame);

  // Look-ahead reporting plus gap interpolation over the accumulated
  // track histories.
  SequenceResult finish() const;

  const std::vector<Track>& live_tracks() const { return tracks_; }
  const std::vector<Track>& dead_tracks() const { return graveyard_; }

 private:
  TrackerConfig cfg_;
  ConfidenceModel conf_model_;
  ClutterModel clutter_model_;
  bool has_conf_model_ = false;
  bool has_clutter_model_ = false;
  double lambda_const_ = 0.0;

  std::vector<Track> tracks_;
  std::vector<Track> graveyard_;
  std::vector<FrameDiagnostics> diags_;
  int next_id_ = 1;
  int last_frame_ = 0;

  ConfidenceEval conf_eval() const;
  ClutterEval clutter_eval() const;
};

SequenceResult run_tracker(std::span<const FrameData> frames, const TrackerConfig& cfg,
                           const ConfidenceModel* conf_model = nullptr,
                           const ClutterModel* clutter_model = nullptr);

// Reporting window per track: boxes from max(birth, confirm - lookahead) on,
// only for tracks that confirm. lookahead < 0 removes the window limit.
std::vector<ReportedBox> apply_lookahead(std::span<const Track> tracks,
                                         int lookahead_frames);

// Linear interpolation across within-track gaps of at most max_gap frames.
void interpolate_gaps(SequenceResult& result, int max_gap);

}  // namespace base
