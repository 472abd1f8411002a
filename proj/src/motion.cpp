#include "base/motion.hpp"

#include <cmath>

namespace base {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// 6x6 transition: interleaved NCV block on (cx, cy, rates), identity on size.
Mat6 transition_matrix(double dt) {
  Mat6 f = Mat6::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

// diag(Q_cv interleaved over the two center axes, I2 on size).
Mat6 base_process_noise(double dt) {
  const auto [f_cv, q_cv] = cv_blocks(dt);
  (void)f_cv;
  Mat6 q = Mat6::Zero();
  for (int a = 0; a < 2; ++a) {      // axis: x, y
    q(a, a) = q_cv(0, 0);            // pos-pos
    q(a, a + 2) = q_cv(0, 1);        // pos-rate
    q(a + 2, a) = q_cv(1, 0);
    q(a + 2, a + 2) = q_cv(1, 1);    // rate-rate
  }
  q(4, 4) = 1.0;
  q(5, 5) = 1.0;
  return q;
}

Mat6 symmetrize(const Mat6& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

std::pair<Mat2, Mat2> cv_blocks(double dt) {
  Mat2 f;
  f << 1.0, dt, 0.0, 1.0;
  Mat2 q;
  const double dt2 = dt * dt;
  q << dt2 * dt / 3.0, dt2 / 2.0, dt2 / 2.0, dt;
  return {f, q};
}

Mat4 effective_r(const MotionParams& p, double track_width) {
  if (!p.scale_r_with_width || p.reference_width <= 0.0) return p.R;
  const double s = track_width / p.reference_width;
  return p.R * (s * s);
}

TrackState predict(const TrackState& s, const MotionParams& p, const CameraMotion& cm,
                   PredictDiag* diag) {
  const Mat6 f = transition_matrix(p.dt);

  // Width scaling makes near (large) targets more agile than distant ones.
  const double w_prev = p.distance_aware ? s.x(4) : p.reference_width;
  Vec6 sigma;
  sigma << p.sigma_ca, p.sigma_ca, p.sigma_ca, p.sigma_ca, p.sigma_sr, p.sigma_sr;
  sigma *= w_prev;
  const Mat6 q = sigma.asDiagonal() * base_process_noise(p.dt) * sigma.asDiagonal();

  Mat2 warp = cm.warp;
  Vec2 trans = cm.translation;
  if (!cm.invertible()) {
    warp = Mat2::Identity();
    trans = Vec2::Zero();
    if (diag) diag->cmc_rejected = true;
  }
  Mat6 t = Mat6::Zero();
  t.block<2, 2>(0, 0) = warp;
  t.block<2, 2>(2, 2) = warp;
  t.block<2, 2>(4, 4) = warp;

  TrackState out;
  out.x = t * (f * s.x);
  out.x.head<2>() += trans;
  out.P = symmetrize(t * (f * s.P * f.transpose() + q) * t.transpose());
  return out;
}

Innovation innovation(const TrackState& s, const BoundingBox& z, const MotionParams& p) {
  const Mat46 h = measurement_matrix();
  Innovation inn;
  Vec4 zv;
  zv << z.cx, z.cy, z.w, z.h;
  inn.y = zv - h * s.x;
  inn.S = effective_r(p, s.x(4)) + h * s.P * h.transpose();
  inn.S = 0.5 * (inn.S + inn.S.transpose()).eval();

  Eigen::LLT<Mat4> llt(inn.S);
  if (llt.info() != Eigen::Success) {
    inn.S += Mat4::Identity() * (1e-9 * inn.S.trace() / 4.0);
    inn.jitter_applied = true;
  }
  return inn;
}

TrackState kf_update(const TrackState& s, const BoundingBox& z, const MotionParams& p) {
  const Mat46 h = measurement_matrix();
  const Innovation inn = innovation(s, z, p);
  const Mat4 r = effective_r(p, s.x(4));

  const Eigen::Matrix<double, 6, 4> k = s.P * h.transpose() * inn.S.inverse();

  TrackState out;
  out.x = s.x + k * inn.y;
  // Joseph form keeps the posterior covariance PSD.
  const Mat6 ikh = Mat6::Identity() - k * h;
  out.P = symmetrize(ikh * s.P * ikh.transpose() + k * r * k.transpose());

  out.x(4) = std::max(out.x(4), 1.0);
  out.x(5) = std::max(out.x(5), 1.0);
  return out;
}

TrackState init_track(const BoundingBox& z, const MotionParams& p) {
  TrackState s;
  s.x << z.cx, z.cy, 0.0, 0.0, z.w, z.h;
  // R permuted into state order, center-rate block from P_cr; the rate block
  // is uncorrelated with the measured components.
  s.P.block<2, 2>(0, 0) = p.R.block<2, 2>(0, 0);
  s.P.block<2, 2>(0, 4) = p.R.block<2, 2>(0, 2);
  s.P.block<2, 2>(4, 0) = p.R.block<2, 2>(2, 0);
  s.P.block<2, 2>(4, 4) = p.R.block<2, 2>(2, 2);
  s.P.block<2, 2>(2, 2) = p.P_cr;
  return s;
}

double log_gaussian(const Vec4& y, const Mat4& S) {
  Eigen::LLT<Mat4> llt(S);
  const Vec4 alpha = llt.matrixL().solve(y);
  double log_det = 0.0;
  for (int i = 0; i < 4; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (4.0 * kLog2Pi + log_det + alpha.squaredNorm());
}

}  // namespace base
