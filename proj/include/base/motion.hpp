#pragma once

#include <Eigen/Dense>

#include <utility>

#include "base/geometry.hpp"

namespace base {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat46 = Eigen::Matrix<double, 4, 6>;

// Kinematic state (c_x, c_y, c_x_rate, c_y_rate, w, h); rates are per second.
struct TrackState {
  Vec6 x = Vec6::Zero();
  Mat6 P = Mat6::Zero();
};

struct MotionParams {
  double sigma_ca = 0.05;  // center acceleration noise, per pixel of width
  double sigma_sr = 0.02;  // size rate noise, per pixel of width
  Mat4 R = Mat4::Identity() * 4.0;   // measurement covariance (cx, cy, w, h)
  Mat2 P_cr = Mat2::Identity() * 100.0;  // initial center-rate covariance
  double dt = 1.0 / 30.0;  // frame period, seconds

  // When distance_aware is off, process noise is scaled by reference_width
  // instead of the track's own width (ablation baseline).
  bool distance_aware = true;
  double reference_width = 50.0;
  // Width-scaled measurement noise is not part of the stock model; exposed
  // for experimentation only.
  bool scale_r_with_width = false;
};

// Measurement selects (c_x, c_y, w, h) out of the state.
inline Mat46 measurement_matrix() {
  Mat46 h = Mat46::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(2, 4) = 1.0;
  h(3, 5) = 1.0;
  return h;
}

// NCV building blocks for one (position, rate) pair.
// F = [[1, dt], [0, 1]], Q = [[dt^3/3, dt^2/2], [dt^2/2, dt]].
std::pair<Mat2, Mat2> cv_blocks(double dt);

struct PredictDiag {
  bool cmc_rejected = false;  // warp was singular, fell back to identity
  bool jitter_applied = false;
};

TrackState predict(const TrackState& s, const MotionParams& p, const CameraMotion& cm,
                   PredictDiag* diag = nullptr);

struct Innovation {
  Vec4 y = Vec4::Zero();
  Mat4 S = Mat4::Identity();
  bool jitter_applied = false;
};

Innovation innovation(const TrackState& s, const BoundingBox& z, const MotionParams& p);

TrackState kf_update(const TrackState& s, const BoundingBox& z, const MotionParams& p);

TrackState init_track(const BoundingBox& z, const MotionParams& p);

// log N(y; 0, S) for the 4-d measurement space.
double log_gaussian(const Vec4& y, const Mat4& S);

// Effective measurement covariance for a track of width w (identity unless
// scale_r_with_width is set).
Mat4 effective_r(const MotionParams& p, double track_width);

}  // namespace base
