#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "base/detector_model.hpp"
#include "base/geometry.hpp"
#include "base/motion.hpp"

namespace base {

enum class ConfidenceMode { Off, Raw, Calibrated };

// How the extraneous-measurement density entering the association
// denominator is evaluated.
struct ClutterEval {
  const ClutterModel* model = nullptr;  // required when dynamic
  bool dynamic = true;
  double constant = 0.0;  // used when !dynamic

  double operator()(const Detection& z) const {
    if (!dynamic) return constant;
    return model ? lambda_ex(*model, z) : 0.0;
  }
};

struct ConfidenceEval {
  const ConfidenceModel* model = nullptr;  // required when Calibrated
  ConfidenceMode mode = ConfidenceMode::Calibrated;

  double operator()(const Detection& z) const;
};

// Per (track, detection) association quantities for one frame.
struct AssocTable {
  int n_tracks = 0;
  int n_dets = 0;
  std::vector<double> log_lik;       // log joint likelihood per pair
  std::vector<double> prob;          // association probability, zeroed by gating
  std::vector<double> prob_pregate;  // as normalized, before gating
  std::vector<uint8_t> gated;        // 1 = admissible assignment candidate
  std::vector<double> lambda;        // per-detection extraneous density
  std::vector<double> ex_share;      // per-detection extraneous probability mass
  std::vector<Innovation> inno;      // cached (y, S) per pair

  size_t idx(int i, int j) const { return static_cast<size_t>(i) * n_dets + j; }
  double prob_at(int i, int j) const { return prob[idx(i, j)]; }
  // One track's probabilities across all detections (pre-gate view).
  std::span<const double> track_row_pregate(int i) const {
    return {prob_pregate.data() + idx(i, 0), static_cast<size_t>(n_dets)};
  }
};

double joint_log_likelihood(const TrackState& s, const Detection& z, const MotionParams& p,
                            const ConfidenceEval& conf);

// Builds likelihoods, normalizes per detection against the extraneous
// density, and applies gating. The pair loop is data-parallel; the per-column
// reductions are always serial so results are identical for any thread count.
AssocTable build_assoc_table(std::span<const TrackState> tracks,
                             std::span<const Detection> dets, const MotionParams& p,
                             const ConfidenceEval& conf, const ClutterEval& clutter,
                             double p_g, bool renormalize_after_gate = false,
                             bool parallel = true);

// Serial reference implementation; must match build_assoc_table bit for bit.
AssocTable build_assoc_table_serial(std::span<const TrackState> tracks,
                                    std::span<const Detection> dets, const MotionParams& p,
                                    const ConfidenceEval& conf, const ClutterEval& clutter,
                                    double p_g, bool renormalize_after_gate = false);

// Gate threshold tau for a given gating confidence.
double gate_threshold(double p_g);

// Zeroes probabilities below tau; the denominator is not recomputed unless
// renormalize is set.
void gate(AssocTable& table, double p_g, bool renormalize = false);

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (track index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_dets;
};

// Minimizes sum of -log prob over gated pairs; pair costs are shifted by
// -log tau so pairs worse than the gate never beat non-assignment.
Assignment solve_assignment(const AssocTable& table, double p_g);

// Traditional likelihood-ratio gate: N(y; 0, S) / (lambda_c + lambda_nt)
// thresholded at (1 - p_g) / p_g.
bool baseline_gate_traditional(const Vec4& y, const Mat4& S, double lambda_c,
                               double lambda_nt, double p_g);

// Traditional association score: y' S^-1 y + log |S|.
double baseline_score_traditional(const Vec4& y, const Mat4& S);

// IOU baseline score: 1 - iou(predicted box, detection box).
double baseline_score_iou(const TrackState& s, const Detection& z);

BoundingBox state_box(const TrackState& s);

}  // namespace base
