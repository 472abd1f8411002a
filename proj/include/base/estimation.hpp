#pragma once

#include <string>
#include <utility>
#include <vector>

#include "base/detector_model.hpp"
#include "base/geometry.hpp"
#include "base/motion.hpp"
#include "base/tracker.hpp"

namespace base {

struct SequenceData {
  std::string name;
  double framerate = 30.0;
  int im_width = 0;
  int im_height = 0;
  bool camera_stationary = false;
  std::vector<FrameData> frames;
  std::vector<GroundTruthBox> gt;
};

struct TrainingSet {
  std::vector<SequenceData> sequences;
};

struct FitReport {
  Mat2 p_cr = Mat2::Zero();
  Mat4 r = Mat4::Zero();
  double sigma_ca = 0.0;
  double sigma_sr = 0.0;
  ConfidenceModel confidence;
  ClutterModel clutter;

  long n_pcr_targets = 0;
  long n_r_samples = 0;
  long n_tracklets = 0;
  std::vector<std::pair<double, double>> cex_trace;  // (c_ex, training MOTA)
  std::vector<double> mle_loglik_trace;              // best log-lik per round
};

// Mutual-nearest IOU matching between one frame's detections and GT boxes.
// GT boxes below min_visibility are excluded.
std::vector<std::pair<int, int>> match_gt(const std::vector<Detection>& dets,
                                          const std::vector<GroundTruthBox>& gts,
                                          double iou_threshold = 0.7,
                                          double min_visibility = 0.1);

// Initial center-rate covariance from first-to-second GT appearances on
// camera-stationary sequences; a second moment about zero with an n-1 divisor.
Mat2 estimate_pcr(const TrainingSet& ts, long* n_targets = nullptr);

// Measurement covariance from detection-to-GT residuals on stationary
// sequences.
Mat4 estimate_r(const TrainingSet& ts, long* n_samples = nullptr);

// One GT target's matched detections in frame order.
struct Tracklet {
  double framerate = 30.0;
  std::vector<Detection> dets;
};

std::vector<Tracklet> build_tracklets(const TrainingSet& ts, int min_length = 3);

// Prediction-error-decomposition MLE over (sigma_ca, sigma_sr): runs the
// filter along each tracklet and scores innovation log-likelihoods.
// Coordinate grid refinement in log-space, `rounds` passes of a 9x9 grid.
std::pair<double, double> mle_sigmas(const std::vector<Tracklet>& tracklets, const Mat4& r,
                                     const Mat2& p_cr, int rounds = 3, int grid = 9,
                                     std::vector<double>* loglik_trace = nullptr);

double tracklet_log_likelihood(const std::vector<Tracklet>& tracklets, const Mat4& r,
                               const Mat2& p_cr, double sigma_ca, double sigma_sr);

// Tracker-level grid search for the extraneous-density scale: runs the full
// tracker per candidate on the training set and keeps the best MOTA
// (ties go to the larger, more conservative value).
double search_cex(const TrainingSet& ts, const FitReport& fit, const TrackerConfig& cfg,
                  std::vector<std::pair<double, double>>* trace = nullptr);

// Full estimation pipeline: matching, covariances, histograms, MLE, c_ex search.
FitReport fit_all(const TrainingSet& ts, const TrackerConfig& cfg);

void save_fit_report(const FitReport& fit, std::ostream& os);
FitReport load_fit_report(std::istream& is);

}  // namespace base
