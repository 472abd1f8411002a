#pragma once

#include <vector>

#include "base/geometry.hpp"
#include "base/tracker.hpp"

namespace base {

struct MetricsReport {
  double mota = 0.0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt_count = 0;
  long matches = 0;
  double idf1 = 0.0;
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
};

// CLEAR-MOT counting: previous-frame correspondences persist while their IOU
// stays above the threshold, remaining pairs are matched by maximum IOU.
MetricsReport clear_mot(const std::vector<GroundTruthBox>& gt,
                        const std::vector<ReportedBox>& reported,
                        double iou_threshold = 0.5);

// Identity F1 over a global trajectory-level matching.
double idf1(const std::vector<GroundTruthBox>& gt, const std::vector<ReportedBox>& reported,
            double iou_threshold = 0.5);

// clear_mot with the IDF1 fields filled in.
MetricsReport evaluate(const std::vector<GroundTruthBox>& gt,
                       const std::vector<ReportedBox>& reported, double iou_threshold = 0.5);

}  // namespace base
