#include "base/track_management.hpp"

#include <cmath>

#include "doctest.h"

using namespace base;

TEST_CASE("ptilde fixtures") {
  CHECK(ptilde({}) == 0.0);
  const double single[] = {0.7};
  CHECK(ptilde({single, 1}) == doctest::Approx(0.7));
  const double two[] = {0.5, 0.5};
  CHECK(ptilde({two, 2}) == doctest::Approx(0.75));
  const double ones[] = {1.0, 1.0};
  CHECK(ptilde({ones, 2}) == doctest::Approx(1.0 - 1e-6));
}

TEST_CASE("lr_step fixtures at p_d 0.95") {
  CHECK(lr_step(0.0, 0.95) == doctest::Approx(std::log(0.05 / 0.95)).epsilon(1e-12));
  CHECK(lr_step(0.0, 0.95) == doctest::Approx(-2.9444).epsilon(1e-4));
  CHECK(lr_step(0.5, 0.95) == doctest::Approx(std::log(0.525 / 0.475)).epsilon(1e-12));
  CHECK(lr_step(0.5, 0.95) == doctest::Approx(0.1001).epsilon(1e-3));
}

TEST_CASE("lr_step is strictly increasing in ptilde") {
  for (double p_d : {0.6, 0.8, 0.95, 0.99}) {
    double prev = lr_step(0.0, p_d);
    for (int k = 1; k <= 40; ++k) {
      const double pt = k / 41.0;
      const double cur = lr_step(pt, p_d);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("lr_step crosses zero at the algebraic root") {
  // Setting numerator = denominator in the increment gives
  // pt* = (2 p_d - 1) / (2 p_d).
  for (double p_d : {0.6, 0.75, 0.95, 0.99}) {
    const double root = (2.0 * p_d - 1.0) / (2.0 * p_d);
    CHECK(lr_step(root, p_d) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lr_step(root + 1e-6, p_d) > 0.0);
    CHECK(lr_step(root - 1e-6, p_d) < 0.0);
  }
}

TEST_CASE("blackman baseline fixtures") {
  CHECK(lr_step_blackman(std::nullopt, 0.95, 1.0, 1.0) ==
        doctest::Approx(std::log(0.05)).epsilon(1e-12));

  // Construct (y, S) so that N(y; 0, S) equals lambda_c exactly.
  Innovation inn;
  inn.y = Vec4::Zero();
  inn.S = Mat4::Identity();
  const double peak = 0.025330295910584444;  // (2 pi)^-2
  CHECK(lr_step_blackman(inn, 0.95, peak, 1.0) ==
        doctest::Approx(std::log(0.95)).epsilon(1e-9));
  CHECK(lr_step_blackman(inn, 0.95, peak, 2.0) ==
        doctest::Approx(std::log(0.95 * 2.0)).epsilon(1e-9));

  CHECK_THROWS(lr_step_blackman(inn, 0.95, 0.0, 1.0));
}

TEST_CASE("repeated strong evidence confirms within 3 frames") {
  ManageParams mp;
  Track t;
  t.log_lr = 0.0;
  for (int k = 0; k < 3; ++k) {
    CHECK(t.status == TrackStatus::Tentative);
    update_lifecycle(t, lr_step(0.9, 0.95), mp);
  }
  CHECK(t.status == TrackStatus::Confirmed);
}

TEST_CASE("a never-detected track dies at the deletion threshold") {
  ManageParams mp;
  Track t;
  t.log_lr = 0.0;
  int frames = 0;
  while (t.status != TrackStatus::Dead && frames < 100) {
    update_lifecycle(t, lr_step(0.0, 0.95), mp);
    ++frames;
  }
  CHECK(t.status == TrackStatus::Dead);
  // -4.6 / -2.9444 rounds up to 2 steps.
  CHECK(frames == 2);
}

TEST_CASE("dead is absorbing") {
  ManageParams mp;
  Track t;
  t.status = TrackStatus::Dead;
  t.log_lr = -10.0;
  update_lifecycle(t, 100.0, mp);
  CHECK(t.status == TrackStatus::Dead);
  CHECK(t.log_lr == -10.0);
}

TEST_CASE("coast limit kills even a high-LR track") {
  ManageParams mp;
  mp.max_coast_frames = 5;
  Track t;
  t.log_lr = mp.log_lr_confirm + 1.0;
  t.status = TrackStatus::Confirmed;
  t.frames_since_detection = 6;
  update_lifecycle(t, 0.0, mp);
  CHECK(t.status == TrackStatus::Dead);
}

TEST_CASE("log LR is capped above the confirmation threshold") {
  ManageParams mp;
  Track t;
  t.log_lr = 0.0;
  for (int k = 0; k < 100; ++k) update_lifecycle(t, 5.0, mp);
  CHECK(t.log_lr == doctest::Approx(mp.log_lr_confirm + mp.peak_margin));
}

TEST_CASE("spawn fixtures") {
  MotionParams p;
  ManageParams mp;
  ConfidenceEval raw;
  raw.mode = ConfidenceMode::Raw;
  int next_id = 1;

  SUBCASE("even odds give zero initial LR") {
    std::vector<Detection> dets{{3, {10.0, 20.0, 5.0, 6.0}, 0.5}};
    const auto tracks = spawn_tracks(dets, p, raw, next_id, 3, mp);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].log_lr == doctest::Approx(0.0));
    CHECK(tracks[0].id == 1);
    CHECK(tracks[0].birth_frame == 3);
    CHECK(tracks[0].status == TrackStatus::Tentative);
  }
  SUBCASE("high confidence clamps at +2") {
    std::vector<Detection> dets{{1, {10.0, 20.0, 5.0, 6.0}, 0.9}};
    const auto tracks = spawn_tracks(dets, p, raw, next_id, 1, mp);
    CHECK(tracks[0].log_lr == doctest::Approx(2.0));
  }
  SUBCASE("no unmatched detections, no spawns") {
    CHECK(spawn_tracks({}, p, raw, next_id, 1, mp).empty());
  }
}
