#include "base/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "base/assignment.hpp"

namespace base {

namespace {

// Forces a maximal matching before cost matters; baseline strategies prefer
// any gated pair over leaving both sides unmatched.
constexpr double kMatchBonus = 1e6;

std::vector<Detection> filter_detections(const std::vector<Detection>& dets,
                                         double threshold, int* dropped) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.confidence >= threshold && d.bbox.valid()) {
      out.push_back(d);
    } else if (dropped) {
      ++*dropped;
    }
  }
  return out;
}

}  // namespace

Tracker::Tracker(const TrackerConfig& cfg, const ConfidenceModel* conf_model,
                 const ClutterModel* clutter_model)
    : cfg_(cfg) {
  if (conf_model) {
    conf_model_ = *conf_model;
    has_conf_model_ = true;
  }
  if (clutter_model) {
    clutter_model_ = *clutter_model;
    has_clutter_model_ = true;
  }
  if (cfg_.confidence == ConfidenceMode::Calibrated && !has_conf_model_) {
    throw std::invalid_argument("tracker: calibrated confidence needs a confidence model");
  }
  if (cfg_.clutter == ClutterMode::Dynamic && !has_clutter_model_ &&
      cfg_.assoc == AssocStrategy::Probabilistic) {
    throw std::invalid_argument("tracker: dynamic clutter needs a clutter model");
  }

  if (cfg_.constant_lambda_override >= 0.0) {
    lambda_const_ = cfg_.constant_lambda_override;
  } else if (has_clutter_model_) {
    lambda_const_ = constant_lambda(clutter_model_);
  }
  const bool needs_lambda_const = cfg_.clutter == ClutterMode::Constant ||
                                  cfg_.assoc != AssocStrategy::Probabilistic;
  if (needs_lambda_const && lambda_const_ <= 0.0) {
    throw std::invalid_argument(
        "tracker: constant clutter density required but not available");
  }
}

ConfidenceEval Tracker::conf_eval() const {
  ConfidenceEval c;
  c.mode = cfg_.confidence;
  c.model = has_conf_model_ ? &conf_model_ : nullptr;
  return c;
}

ClutterEval Tracker::clutter_eval() const {
  ClutterEval c;
  c.dynamic = cfg_.clutter == ClutterMode::Dynamic;
  c.model = has_clutter_model_ ? &clutter_model_ : nullptr;
  c.constant = lambda_const_;
  return c;
}

FrameDiagnostics Tracker::step(const FrameData& frame) {
  const auto t_start = std::chrono::steady_clock::now();
  if (frame.frame <= last_frame_) {
    throw std::runtime_error("tracker: frames must be presented in increasing order");
  }
  last_frame_ = frame.frame;

  FrameDiagnostics diag;
  diag.frame = frame.frame;
  diag.n_tracks_in = static_cast<int>(tracks_.size());

  // 1. Predict to the current frame.
  for (auto& t : tracks_) {
    PredictDiag pd;
    t.state = predict(t.state, cfg_.motion, frame.camera_motion, &pd);
    diag.cmc_rejected |= pd.cmc_rejected;
  }

  const std::vector<Detection> dets =
      filter_detections(frame.detections, cfg_.detection_threshold, &diag.n_dets_dropped);
  diag.n_dets = static_cast<int>(dets.size());

  std::vector<TrackState> states(tracks_.size());
  for (size_t i = 0; i < tracks_.size(); ++i) states[i] = tracks_[i].state;

  // 2-3. Gate and associate per strategy.
  Assignment assignment;
  std::vector<double> increments(tracks_.size(), 0.0);

  if (cfg_.assoc == AssocStrategy::Probabilistic) {
    const AssocTable table =
        build_assoc_table(states, dets, cfg_.motion, conf_eval(), clutter_eval(), cfg_.p_g,
                          cfg_.renormalize_after_gate, cfg_.parallel_assoc);
    assignment = solve_assignment(table, cfg_.p_g);
    for (size_t i = 0; i < tracks_.size(); ++i) {
      const double pt =
          ptilde(table.track_row_pregate(static_cast<int>(i)), cfg_.manage.ptilde_cap);
      increments[i] = lr_step(pt, cfg_.manage.p_d);
    }
  } else {
    const int n = static_cast<int>(tracks_.size());
    const int m = static_cast<int>(dets.size());
    std::vector<double> cost(static_cast<size_t>(n) * m, kInfeasible);
    std::vector<Innovation> innos(static_cast<size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const size_t k = static_cast<size_t>(i) * m + j;
        if (cfg_.assoc == AssocStrategy::Iou) {
          const double score = baseline_score_iou(states[i], dets[j]);
          if (1.0 - score > cfg_.iou_gate) {
            cost[k] = score - (1.0 - cfg_.iou_gate);
          }
          innos[k] = innovation(states[i], dets[j].bbox, cfg_.motion);
        } else {
          const Innovation inn = innovation(states[i], dets[j].bbox, cfg_.motion);
          innos[k] = inn;
          if (baseline_gate_traditional(inn.y, inn.S, 0.5 * lambda_const_,
                                        0.5 * lambda_const_, cfg_.p_g)) {
            cost[k] = baseline_score_traditional(inn.y, inn.S) - kMatchBonus;
          }
        }
      }
    }
    const MatchResult mr = solve_matching(cost, n, m);
    assignment.pairs = mr.pairs;
    assignment.unmatched_tracks = mr.unmatched_rows;
    assignment.unmatched_dets = mr.unmatched_cols;

    std::vector<std::optional<Innovation>> matched_inno(tracks_.size());
    std::vector<double> lr_signal(tracks_.size(), 1.0);
    const ConfidenceEval ce = conf_eval();
    for (const auto& [ti, dj] : assignment.pairs) {
      matched_inno[ti] = innos[static_cast<size_t>(ti) * m + dj];
      if (cfg_.confidence != ConfidenceMode::Off) {
        const double c = std::clamp(ce(dets[dj]), 1e-9, 1.0 - 1e-9);
        lr_signal[ti] = std::clamp(c / (1.0 - c), std::exp(-2.0), std::exp(2.0));
      }
    }
    for (size_t i = 0; i < tracks_.size(); ++i) {
      increments[i] =
          lr_step_blackman(matched_inno[i], cfg_.manage.p_d, lambda_const_, lr_signal[i]);
    }
  }

  // 4. Update matched tracks.
  std::vector<char> det_matched(dets.size(), 0);
  std::vector<char> track_matched(tracks_.size(), 0);
  for (const auto& [ti, dj] : assignment.pairs) {
    tracks_[ti].state = kf_update(tracks_[ti].state, dets[dj].bbox, cfg_.motion);
    tracks_[ti].frames_since_detection = 0;
    track_matched[ti] = 1;
    det_matched[dj] = 1;
  }
  diag.n_matched = static_cast<int>(assignment.pairs.size());

  // 5. Manage lifecycles and record history.
  for (size_t i = 0; i < tracks_.size(); ++i) {
    Track& t = tracks_[i];
    if (!track_matched[i]) ++t.frames_since_detection;
    update_lifecycle(t, increments[i], cfg_.manage);
    if (t.status != TrackStatus::Dead) {
      t.history.push_back({frame.frame, state_box(t.state),
                           static_cast<bool>(track_matched[i]), t.status, t.log_lr});
    }
  }

  // 6. Spawn from unmatched detections (already in descending-confidence
  // order, keeping IDs deterministic).
  std::vector<Detection> unmatched;
  for (size_t j = 0; j < dets.size(); ++j) {
    if (!det_matched[j]) unmatched.push_back(dets[j]);
  }
  std::vector<Track> spawned =
      spawn_tracks(unmatched, cfg_.motion, conf_eval(), next_id_, frame.frame, cfg_.manage);
  diag.n_spawned = static_cast<int>(spawned.size());
  for (auto& t : spawned) {
    t.history.push_back({frame.frame, state_box(t.state), true, t.status, t.log_lr});
    tracks_.push_back(std::move(t));
  }

  // 7. Retire the dead.
  std::vector<Track> alive;
  alive.reserve(tracks_.size());
  for (auto& t : tracks_) {
    if (t.status == TrackStatus::Dead) {
      graveyard_.push_back(std::move(t));
    } else {
      alive.push_back(std::move(t));
    }
  }
  tracks_ = std::move(alive);

  for (const auto& t : tracks_) {
    if (t.status == TrackStatus::Confirmed) ++diag.n_confirmed;
  }
  diag.wall_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t_start)
                     .count();
  diags_.push_back(diag);
  return diag;
}

std::vector<ReportedBox> apply_lookahead(std::span<const Track> tracks,
                                         int lookahead_frames) {
  std::vector<ReportedBox> out;
  for (const Track& t : tracks) {
    int confirm_frame = -1;
    for (const auto& h : t.history) {
      if (h.status == TrackStatus::Confirmed) {
        confirm_frame = h.frame;
        break;
      }
    }
    if (confirm_frame < 0) continue;

    const int report_from = lookahead_frames < 0
                                ? t.birth_frame
                                : std::max(t.birth_frame, confirm_frame - lookahead_frames);
    for (const auto& h : t.history) {
      if (h.frame < report_from || !h.detected) continue;
      out.push_back({h.frame, t.id, h.box, std::min(1.0, std::exp(h.log_lr) / 100.0),
                     false});
    }
  }
  std::sort(out.begin(), out.end(), [](const ReportedBox& a, const ReportedBox& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.track_id < b.track_id;
  });
  return out;
}

void interpolate_gaps(SequenceResult& result, int max_gap) {
  std::map<int, std::vector<const ReportedBox*>> by_track;
  for (const auto& b : result.boxes) by_track[b.track_id].push_back(&b);

  std::vector<ReportedBox> inserted;
  for (auto& [id, rows] : by_track) {
    for (size_t k = 1; k < rows.size(); ++k) {
      const ReportedBox& a = *rows[k - 1];
      const ReportedBox& b = *rows[k];
      const int gap = b.frame - a.frame - 1;
      if (gap < 1 || gap > max_gap) continue;
      for (int f = a.frame + 1; f < b.frame; ++f) {
        const double u = static_cast<double>(f - a.frame) / (b.frame - a.frame);
        ReportedBox r;
        r.frame = f;
        r.track_id = id;
        r.box.cx = a.box.cx + u * (b.box.cx - a.box.cx);
        r.box.cy = a.box.cy + u * (b.box.cy - a.box.cy);
        r.box.w = a.box.w + u * (b.box.w - a.box.w);
        r.box.h = a.box.h + u * (b.box.h - a.box.h);
        r.confidence = a.confidence + u * (b.confidence - a.confidence);
        r.interpolated = true;
        inserted.push_back(r);
      }
    }
  }

  result.boxes.insert(result.boxes.end(), inserted.begin(), inserted.end());
  std::sort(result.boxes.begin(), result.boxes.end(),
            [](const ReportedBox& a, const ReportedBox& b) {
              if (a.frame != b.frame) return a.frame < b.frame;
              return a.track_id < b.track_id;
            });
}

SequenceResult Tracker::finish() const {
  SequenceResult result;
  std::vector<Track> all(graveyard_.begin(), graveyard_.end());
  all.insert(all.end(), tracks_.begin(), tracks_.end());
  std::sort(all.begin(), all.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  result.boxes = apply_lookahead(all, cfg_.lookahead_frames);
  interpolate_gaps(result, cfg_.max_interp_gap);
  result.diagnostics = diags_;
  return result;
}

SequenceResult run_tracker(std::span<const FrameData> frames, const TrackerConfig& cfg,
                           const ConfidenceModel* conf_model,
                           const ClutterModel* clutter_model) {
  if (frames.empty()) throw std::invalid_argument("run_tracker: empty sequence");
  Tracker tracker(cfg, conf_model, clutter_model);
  for (const FrameData& f : frames) tracker.step(f);
  return tracker.finish();
}

}  // namespace base
