#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "base/association.hpp"
#include "base/geometry.hpp"
#include "base/motion.hpp"

namespace base {

enum class TrackStatus { Tentative, Confirmed, Dead };

struct TrackHistoryEntry {
  int frame = 0;
  BoundingBox box;
  bool detected = false;
  TrackStatus status = TrackStatus::Tentative;
  double log_lr = 0.0;
};

struct Track {
  int id = 0;
  TrackState state;
  double log_lr = 0.0;
  TrackStatus status = TrackStatus::Tentative;
  int frames_since_detection = 0;
  int birth_frame = 0;
  std::vector<TrackHistoryEntry> history;  // append-only
};

struct ManageParams {
  double p_d = 0.95;
  double log_lr_confirm = 4.6;   // LR 100
  double log_lr_delete = -4.6;   // LR 1/100
  int max_coast_frames = 30;
  double ptilde_cap = 1.0 - 1e-6;
  double peak_margin = 5.0;      // log LR capped at confirm + margin
  double init_lr_clamp = 2.0;    // spawn logit clamp
};

// Probability that at least one current-frame detection originates from the
// track: 1 - prod_j (1 - p_ij), capped just below 1.
double ptilde(std::span<const double> track_row, double cap = 1.0 - 1e-6);

// Per-frame log-LR increment collecting contributions from all measurements.
double lr_step(double ptilde_value, double p_d);

// Traditional per-frame LR factor: uses the single associated measurement
// against a constant clutter density. Ablation baseline only.
double lr_step_blackman(const std::optional<Innovation>& associated, double p_d,
                        double lambda_c, double lr_signal);

void update_lifecycle(Track& t, double increment, const ManageParams& mp);

// One tentative track per unmatched detection; initial log LR from the
// clamped confidence logit.
std::vector<Track> spawn_tracks(std::span<const Detection> unmatched_dets,
                                const MotionParams& p, const ConfidenceEval& conf,
                                int& next_id, int frame, const ManageParams& mp);

}  // namespace base
