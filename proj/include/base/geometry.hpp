#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace base {

// Axis-aligned box in center format (cx, cy, w, h), pixels.
// MOT files store top-left + size; conversion happens at the I/O boundary.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  static BoundingBox from_corners(double x1, double y1, double x2, double y2) {
    return {0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1};
  }

  // (x1, y1, x2, y2)
  std::array<double, 4> corners() const {
    return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  }

  bool valid() const {
    return w > 0.0 && h > 0.0 && std::isfinite(cx) && std::isfinite(cy) &&
           std::isfinite(w) && std::isfinite(h);
  }
};

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const double ix = std::max(0.0, std::min(ca[2], cb[2]) - std::max(ca[0], cb[0]));
  const double iy = std::max(0.0, std::min(ca[3], cb[3]) - std::max(ca[1], cb[1]));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct Detection {
  int frame = 0;  // 1-based
  BoundingBox bbox;
  double confidence = 0.0;  // in [0, 1]
};

struct GroundTruthBox {
  int frame = 0;
  int target_id = 0;
  BoundingBox bbox;
  double visibility = 1.0;
};

// Per-frame affine ego-motion: p_k = warp * p_{k-1} + translation.
struct CameraMotion {
  Eigen::Matrix2d warp = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  bool invertible() const {
    const double det = warp.determinant();
    return std::isfinite(det) && det != 0.0;
  }
};

struct FrameData {
  int frame = 0;
  std::vector<Detection> detections;  // sorted by descending confidence
  CameraMotion camera_motion;
  double timestamp = 0.0;  // seconds
};

// Canonical detection order: descending confidence, geometry as tie-break.
// Keeps track spawning and assignment tie-breaking deterministic.
inline void sort_detections(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.bbox.cx != b.bbox.cx) return a.bbox.cx < b.bbox.cx;
    return a.bbox.cy < b.bbox.cy;
  });
}

}  // namespace base
