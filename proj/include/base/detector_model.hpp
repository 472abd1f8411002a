#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "base/geometry.hpp"

namespace base {

// Calibrated confidence likelihood: per (confidence, width) bin the fraction
// of training detections that were inliers (matched to ground truth).
struct ConfidenceModel {
  std::vector<double> conf_edges;   // n_conf_bins + 1, uniform on [0, 1]
  std::vector<double> width_edges;  // n_width_bins + 1, log-spaced
  std::vector<double> ratio;        // conf-major: ratio[ci * n_width + wi]
  double floor = 0.01;

  int n_conf_bins() const { return static_cast<int>(conf_edges.size()) - 1; }
  int n_width_bins() const { return static_cast<int>(width_edges.size()) - 1; }
};

// Extraneous-measurement density over box width: detections per frame per
// pixel of width, scaled by c_ex (clutter and new targets share one model).
struct ClutterModel {
  std::vector<double> width_edges;
  std::vector<double> density;
  double c_ex = 1.0;
};

ConfidenceModel fit_confidence(const std::vector<Detection>& inliers,
                               const std::vector<Detection>& all, int n_conf_bins = 10,
                               int n_width_bins = 12, double floor = 0.01);

double conf_likelihood(const ConfidenceModel& m, double confidence, double width);

ClutterModel fit_width_density(const std::vector<Detection>& all, int n_frames,
                               int n_width_bins = 12);

double lambda_ex(const ClutterModel& m, const Detection& z);

// Constant-clutter ablation baseline: c_ex times the mean per-bin density.
double constant_lambda(const ClutterModel& m);

// Versioned line-oriented text format, bit-exact round-trip.
void save_confidence_model(const ConfidenceModel& m, std::ostream& os);
void save_clutter_model(const ClutterModel& m, std::ostream& os);
ConfidenceModel load_confidence_model(std::istream& is);
ClutterModel load_clutter_model(std::istream& is);

}  // namespace base
