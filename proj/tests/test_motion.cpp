#include "base/motion.hpp"

#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace base;

namespace {

MotionParams default_params() {
  MotionParams p;
  p.sigma_ca = 0.05;
  p.sigma_sr = 0.02;
  p.R = Mat4::Identity();
  p.P_cr = Mat2::Identity() * 9.0;
  p.dt = 1.0;
  return p;
}

oracle::Mat to_mat(const Mat6& m) {
  oracle::Mat out = oracle::zeros(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) out[i][j] = m(i, j);
  }
  return out;
}

double min_eigenvalue(const Mat6& m) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("cv_blocks substitution at dt=1") {
  const auto [f, q] = cv_blocks(1.0);
  CHECK(f(0, 0) == 1.0);
  CHECK(f(0, 1) == 1.0);
  CHECK(f(1, 0) == 0.0);
  CHECK(f(1, 1) == 1.0);
  CHECK(q(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(q(0, 1) == doctest::Approx(0.5));
  CHECK(q(1, 0) == doctest::Approx(0.5));
  CHECK(q(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("cv_blocks vanish as dt goes to 0") {
  const auto [f, q] = cv_blocks(1e-12);
  CHECK(f(0, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(q.norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("predict keeps a zero-velocity center in place") {
  MotionParams p = default_params();
  TrackState s;
  s.x << 100.0, 200.0, 0.0, 0.0, 50.0, 100.0;
  const TrackState out = predict(s, p, CameraMotion{});
  CHECK(out.x(0) == doctest::Approx(100.0));
  CHECK(out.x(1) == doctest::Approx(200.0));
  CHECK(out.x(4) == doctest::Approx(50.0));
  CHECK(out.x(5) == doctest::Approx(100.0));
}

TEST_CASE("predict applies pure translation to the center only") {
  MotionParams p = default_params();
  TrackState s;
  s.x << 100.0, 200.0, 0.0, 0.0, 50.0, 100.0;
  CameraMotion cm;
  cm.translation << 3.0, -2.0;
  const TrackState out = predict(s, p, cm);
  CHECK(out.x(0) == doctest::Approx(103.0));
  CHECK(out.x(1) == doctest::Approx(198.0));
  CHECK(out.x(4) == doctest::Approx(50.0));
  CHECK(out.x(5) == doctest::Approx(100.0));
}

TEST_CASE("predict position noise follows the width-scaled NCV block") {
  // w=50, sigma_ca=0.05, dt=1: position variance (50*0.05)^2 / 3.
  MotionParams p = default_params();
  TrackState s;
  s.x << 100.0, 200.0, 0.0, 0.0, 50.0, 100.0;
  s.P = Mat6::Zero();
  const TrackState out = predict(s, p, CameraMotion{});
  CHECK(out.P(0, 0) == doctest::Approx(2.0833333333).epsilon(1e-6));
  CHECK(out.P(1, 1) == doctest::Approx(2.0833333333).epsilon(1e-6));
}

TEST_CASE("singular warp falls back to identity and flags it") {
  MotionParams p = default_params();
  TrackState s;
  s.x << 10.0, 10.0, 0.0, 0.0, 5.0, 5.0;
  CameraMotion cm;
  cm.warp << 1.0, 1.0, 1.0, 1.0;  // det 0
  cm.translation << 100.0, 100.0;
  PredictDiag diag;
  const TrackState out = predict(s, p, cm, &diag);
  CHECK(diag.cmc_rejected);
  CHECK(out.x(0) == doctest::Approx(10.0));
}

TEST_CASE("predict matches the dense loop oracle on random states") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MotionParams p = default_params();
  p.dt = 1.0 / 25.0;

  for (int rep = 0; rep < 200; ++rep) {
    TrackState s;
    s.x << 300.0 + 50.0 * u(gen), 200.0 + 50.0 * u(gen), 10.0 * u(gen), 10.0 * u(gen),
        40.0 + 10.0 * u(gen), 80.0 + 10.0 * u(gen);
    Mat6 a = Mat6::Random() * 2.0;
    s.P = a * a.transpose();

    double warp[2][2] = {{1.0 + 0.01 * u(gen), 0.01 * u(gen)},
                         {0.01 * u(gen), 1.0 + 0.01 * u(gen)}};
    double trans[2] = {5.0 * u(gen), 5.0 * u(gen)};
    CameraMotion cm;
    cm.warp << warp[0][0], warp[0][1], warp[1][0], warp[1][1];
    cm.translation << trans[0], trans[1];

    const TrackState got = predict(s, p, cm);
    std::array<double, 6> x_in;
    for (int i = 0; i < 6; ++i) x_in[i] = s.x(i);
    const auto want =
        oracle::dense_predict(x_in, to_mat(s.P), p.dt, p.sigma_ca, p.sigma_sr, s.x(4),
                              warp, trans);
    for (int i = 0; i < 6; ++i) {
      CHECK(got.x(i) == doctest::Approx(want.x[i]).epsilon(1e-9));
      for (int j = 0; j < 6; ++j) {
        CHECK(got.P(i, j) == doctest::Approx(want.p[i][j]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("innovation fixtures") {
  MotionParams p = default_params();
  TrackState s;
  s.x << 10.0, 20.0, 0.0, 0.0, 5.0, 6.0;

  SUBCASE("zero residual when the measurement equals Hx") {
    const Innovation inn = innovation(s, BoundingBox{10.0, 20.0, 5.0, 6.0}, p);
    CHECK(inn.y.norm() == doctest::Approx(0.0));
  }
  SUBCASE("S reduces to R for a zero prior covariance") {
    s.P = Mat6::Zero();
    const Innovation inn = innovation(s, BoundingBox{11.0, 20.0, 5.0, 6.0}, p);
    CHECK((inn.S - p.R).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("diagonal prior adds onto R") {
    s.P = Mat6::Zero();
    s.P(0, 0) = 4.0;
    s.P(1, 1) = 4.0;
    s.P(4, 4) = 1.0;
    s.P(5, 5) = 1.0;
    const Innovation inn = innovation(s, BoundingBox{11.0, 20.0, 5.0, 6.0}, p);
    CHECK(inn.S(0, 0) == doctest::Approx(5.0));
    CHECK(inn.S(1, 1) == doctest::Approx(5.0));
    CHECK(inn.S(2, 2) == doctest::Approx(2.0));
    CHECK(inn.S(3, 3) == doctest::Approx(2.0));
  }
}

TEST_CASE("update fixtures") {
  MotionParams p = default_params();

  SUBCASE("zero prior covariance pins the posterior mean") {
    TrackState s;
    s.x << 10.0, 20.0, 1.0, 1.0, 5.0, 6.0;
    s.P = Mat6::Zero();
    const TrackState out = kf_update(s, BoundingBox{15.0, 25.0, 8.0, 9.0}, p);
    CHECK((out.x - s.x).norm() == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("diffuse prior follows the measurement") {
    TrackState s;
    s.x << 10.0, 20.0, 0.0, 0.0, 5.0, 6.0;
    s.P = Mat6::Identity() * 1e6;
    const TrackState out = kf_update(s, BoundingBox{15.0, 25.0, 8.0, 9.0}, p);
    CHECK(out.x(0) == doctest::Approx(15.0).epsilon(1e-3));
    CHECK(out.x(1) == doctest::Approx(25.0).epsilon(1e-3));
    CHECK(out.x(4) == doctest::Approx(8.0).epsilon(1e-3));
    CHECK(out.x(5) == doctest::Approx(9.0).epsilon(1e-3));
  }
  SUBCASE("matches the dense conditioning oracle on random states") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
      TrackState s;
      s.x << 100.0 * u(gen), 100.0 * u(gen), 5.0 * u(gen), 5.0 * u(gen),
          30.0 + 5.0 * u(gen), 60.0 + 5.0 * u(gen);
      Mat6 a = Mat6::Random();
      s.P = a * a.transpose() + Mat6::Identity() * 0.1;

      const BoundingBox z{s.x(0) + u(gen), s.x(1) + u(gen), s.x(4) + u(gen),
                          s.x(5) + u(gen)};
      const TrackState got = kf_update(s, z, p);

      std::array<double, 6> x_in;
      for (int i = 0; i < 6; ++i) x_in[i] = s.x(i);
      oracle::Mat r = oracle::zeros(4, 4);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) r[i][j] = p.R(i, j);
      }
      const auto want = oracle::dense_update(x_in, to_mat(s.P), {z.cx, z.cy, z.w, z.h}, r);
      for (int i = 0; i < 6; ++i) {
        CHECK(got.x(i) == doctest::Approx(want.x[i]).epsilon(1e-9));
        for (int j = 0; j < 6; ++j) {
          CHECK(got.P(i, j) ==
                doctest::Approx(want.p[i][j]).epsilon(1e-7).scale(std::abs(want.p[i][j]) + 1.0));
        }
      }
    }
  }
}

TEST_CASE("init_track permutes R and P_cr into state order") {
  MotionParams p = default_params();
  p.R = Vec4(1.0, 2.0, 3.0, 4.0).asDiagonal();
  p.P_cr = Mat2::Identity() * 9.0;
  const TrackState s = init_track(BoundingBox{10.0, 20.0, 5.0, 6.0}, p);
  CHECK(s.x(2) == 0.0);
  CHECK(s.x(3) == 0.0);
  CHECK(s.P(0, 0) == 1.0);
  CHECK(s.P(1, 1) == 2.0);
  CHECK(s.P(2, 2) == 9.0);
  CHECK(s.P(3, 3) == 9.0);
  CHECK(s.P(4, 4) == 3.0);
  CHECK(s.P(5, 5) == 4.0);
}

TEST_CASE("zero rate prior stays zero through prediction") {
  MotionParams p = default_params();
  p.P_cr = Mat2::Zero();
  const TrackState s = init_track(BoundingBox{10.0, 20.0, 50.0, 60.0}, p);
  const TrackState pred = predict(s, p, CameraMotion{});
  CHECK(pred.x(2) == 0.0);
  CHECK(pred.x(3) == 0.0);
  // Rate variance comes from the process noise alone.
  const auto [f_cv, q_cv] = cv_blocks(p.dt);
  (void)f_cv;
  const double q_rate = q_cv(1, 1) * (50.0 * p.sigma_ca) * (50.0 * p.sigma_ca);
  CHECK(pred.P(2, 2) == doctest::Approx(q_rate).epsilon(1e-12));
}

TEST_CASE("init_track preserves measured cross-covariances") {
  MotionParams p = default_params();
  p.R << 1.0, 0.1, 0.2, 0.3,
         0.1, 2.0, 0.4, 0.5,
         0.2, 0.4, 3.0, 0.6,
         0.3, 0.5, 0.6, 4.0;
  const TrackState s = init_track(BoundingBox{0.0, 0.0, 5.0, 6.0}, p);
  CHECK(s.P(0, 4) == doctest::Approx(0.2));  // (cx, w) of R
  CHECK(s.P(1, 5) == doctest::Approx(0.5));  // (cy, h) of R
  CHECK(s.P(0, 2) == 0.0);                   // rate block uncorrelated
  CHECK(s.P(2, 4) == 0.0);
}

TEST_CASE("predict and update keep P symmetric PSD") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MotionParams p = default_params();
  for (int rep = 0; rep < 100; ++rep) {
    TrackState s;
    s.x << 100.0 * u(gen), 100.0 * u(gen), u(gen), u(gen), 20.0 + 5.0 * u(gen),
        40.0 + 5.0 * u(gen);
    Mat6 a = Mat6::Random();
    s.P = a * a.transpose();
    const TrackState pred = predict(s, p, CameraMotion{});
    CHECK((pred.P - pred.P.transpose()).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(min_eigenvalue(pred.P) >= -1e-9 * pred.P.trace());
    const TrackState post =
        kf_update(pred, BoundingBox{pred.x(0) + u(gen), pred.x(1) + u(gen),
                                    pred.x(4) + u(gen), pred.x(5) + u(gen)},
                  p);
    CHECK((post.P - post.P.transpose()).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(min_eigenvalue(post.P) >= -1e-9 * post.P.trace());
  }
}

TEST_CASE("noise-free straight-line motion converges after burn-in") {
  MotionParams p = default_params();
  p.sigma_ca = 1e-6;
  p.sigma_sr = 1e-6;
  p.dt = 1.0;
  const double vx = 3.0;

  TrackState s = init_track(BoundingBox{0.0, 0.0, 20.0, 40.0}, p);
  double prev_err = -1.0;
  double initial_err = 0.0;
  for (int k = 1; k <= 60; ++k) {
    s = predict(s, p, CameraMotion{});
    const double true_cx = vx * k;
    s = kf_update(s, BoundingBox{true_cx, 0.0, 20.0, 40.0}, p);
    const double err = std::abs(s.x(0) - true_cx);
    if (k == 1) initial_err = std::max(err, 1.0);
    if (k > 10) {
      CHECK(err <= prev_err + 1e-6 * initial_err);
    }
    prev_err = err;
  }
  CHECK(prev_err < 1e-3);
}

TEST_CASE("width scaling doubles the noise quadratically") {
  MotionParams p = default_params();
  TrackState narrow, wide;
  narrow.x << 0.0, 0.0, 0.0, 0.0, 30.0, 60.0;
  wide.x << 0.0, 0.0, 0.0, 0.0, 90.0, 180.0;
  narrow.P = Mat6::Zero();
  wide.P = Mat6::Zero();
  const TrackState qn = predict(narrow, p, CameraMotion{});
  const TrackState qw = predict(wide, p, CameraMotion{});
  for (int i = 0; i < 6; ++i) {
    CHECK(qw.P(i, i) == doctest::Approx(9.0 * qn.P(i, i)).epsilon(1e-12));
  }
}

TEST_CASE("optional width-scaled measurement noise") {
  MotionParams p = default_params();
  p.reference_width = 50.0;
  TrackState wide;
  wide.x << 0.0, 0.0, 0.0, 0.0, 100.0, 200.0;
  wide.P = Mat6::Zero();

  const Innovation plain = innovation(wide, BoundingBox{0.0, 0.0, 100.0, 200.0}, p);
  CHECK(plain.S(0, 0) == doctest::Approx(p.R(0, 0)));

  p.scale_r_with_width = true;
  const Innovation scaled = innovation(wide, BoundingBox{0.0, 0.0, 100.0, 200.0}, p);
  CHECK(scaled.S(0, 0) == doctest::Approx(4.0 * p.R(0, 0)));  // (100/50)^2
}

TEST_CASE("pure translation commutes with prediction") {
  MotionParams p = default_params();
  TrackState s;
  s.x << 50.0, 60.0, 2.0, -1.0, 20.0, 40.0;
  Mat6 a = Mat6::Random();
  s.P = a * a.transpose();

  CameraMotion cm;
  cm.translation << 7.0, -4.0;
  const TrackState with_cmc = predict(s, p, cm);

  TrackState shifted = s;
  shifted.x(0) += 7.0;
  shifted.x(1) += -4.0;
  const TrackState then_predict = predict(shifted, p, CameraMotion{});
  CHECK((with_cmc.x - then_predict.x).norm() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK((with_cmc.P - then_predict.P).norm() == doctest::Approx(0.0).epsilon(1e-9));
}
