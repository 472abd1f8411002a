#include "base/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace base {

namespace {

struct SimTarget {
  int id = 0;
  double cx, cy, vx, vy, w, h;
  int birth = 1;
  int death = 1 << 30;
};

struct ClutterSource {
  double cx, cy, w, h;
  int remaining;
};

void reflect(double& pos, double& vel, double half, double limit) {
  if (pos - half < 0.0) {
    pos = 2.0 * half - pos;
    vel = -vel;
  } else if (pos + half > limit) {
    pos = 2.0 * (limit - half) - pos;
    vel = -vel;
  }
}

}  // namespace

SimOutput simulate(const SimConfig& cfg) {
  Rng rng(cfg.seed);
  SimOutput out;
  out.framerate = cfg.framerate;
  out.im_width = cfg.im_width;
  out.im_height = cfg.im_height;

  const double dt = 1.0 / cfg.framerate;
  const auto [f_cv, q_cv] = cv_blocks(dt);
  (void)f_cv;
  // Cholesky of the per-axis NCV noise block.
  const double l00 = std::sqrt(q_cv(0, 0));
  const double l10 = q_cv(1, 0) / l00;
  const double l11 = std::sqrt(q_cv(1, 1) - l10 * l10);
  const Eigen::LLT<Mat4> r_llt(cfg.r_true);
  const Mat4 r_chol = cfg.r_true.isZero(0.0) ? Mat4::Zero() : Mat4(r_llt.matrixL());

  std::vector<SimTarget> targets(cfg.n_targets);
  for (int i = 0; i < cfg.n_targets; ++i) {
    SimTarget& t = targets[i];
    t.id = i + 1;
    // Log-uniform widths cover the heterogeneous-size regime.
    t.w = std::exp(rng.uniform(std::log(cfg.min_width), std::log(cfg.max_width)));
    t.h = cfg.aspect * t.w;
    t.cx = rng.uniform(t.w, cfg.im_width - t.w);
    t.cy = rng.uniform(t.h / 2.0, cfg.im_height - t.h / 2.0);
    // Larger (nearer) targets move proportionally faster.
    const double speed_sd = cfg.scale_speed_with_width
                                ? cfg.init_speed_sd * (t.w / cfg.min_width) / 4.0
                                : cfg.init_speed_sd;
    t.vx = rng.normal() * speed_sd;
    t.vy = rng.normal() * speed_sd;
    if (cfg.birth_death) {
      t.birth = 1 + static_cast<int>(rng.uniform() * cfg.n_frames / 2);
      t.death = t.birth + 20 + static_cast<int>(rng.uniform() * cfg.n_frames / 2);
    }
  }

  std::vector<ClutterSource> clutter;
  out.frames.resize(cfg.n_frames);
  for (int frame = 1; frame <= cfg.n_frames; ++frame) {
    FrameData& fd = out.frames[frame - 1];
    fd.frame = frame;
    fd.timestamp = (frame - 1) * dt;

    for (SimTarget& t : targets) {
      if (frame < t.birth || frame > t.death) continue;

      if (frame > t.birth) {
        // NCV step with width-scaled acceleration noise per axis.
        const double sca = t.w * cfg.sigma_ca;
        const double a1 = rng.normal(), a2 = rng.normal();
        const double b1 = rng.normal(), b2 = rng.normal();
        t.cx += dt * t.vx + sca * l00 * a1;
        t.vx += sca * (l10 * a1 + l11 * a2);
        t.cy += dt * t.vy + sca * l00 * b1;
        t.vy += sca * (l10 * b1 + l11 * b2);
        const double ssr = t.w * cfg.sigma_sr;
        t.w = std::max(2.0, t.w + ssr * rng.normal());
        t.h = std::max(2.0, t.h + ssr * rng.normal());
        reflect(t.cx, t.vx, t.w / 2.0, cfg.im_width);
        reflect(t.cy, t.vy, t.h / 2.0, cfg.im_height);
      }

      out.gt.push_back({frame, t.id, {t.cx, t.cy, t.w, t.h}, 1.0});

      if (rng.uniform() < cfg.p_d) {
        Vec4 noise;
        noise << rng.normal(), rng.normal(), rng.normal(), rng.normal();
        const Vec4 e = r_chol * noise;
        Detection d;
        d.frame = frame;
        d.bbox = {t.cx + e(0), t.cy + e(1), std::max(1.0, t.w + e(2)),
                  std::max(1.0, t.h + e(3))};
        d.confidence =
            std::clamp(cfg.inlier_conf_mean + cfg.inlier_conf_sd * rng.normal(), 0.01, 1.0);
        fd.detections.push_back(d);
      }
    }

    // Clutter sources spawn, linger for a geometric lifetime, and emit one
    // jittered detection per frame while alive.
    const double spawn_rate =
        frame == 1 ? cfg.clutter_rate : cfg.clutter_rate / cfg.clutter_persistence;
    const int n_new = rng.poisson(spawn_rate);
    for (int c = 0; c < n_new; ++c) {
      ClutterSource s;
      s.w = rng.power_law(cfg.clutter_width_min, cfg.clutter_width_max,
                          cfg.clutter_width_alpha);
      s.h = cfg.aspect * s.w * rng.uniform(0.8, 1.2);
      s.cx = rng.uniform(0.0, cfg.im_width);
      s.cy = rng.uniform(0.0, cfg.im_height);
      s.remaining = rng.geometric(cfg.clutter_persistence);
      clutter.push_back(s);
    }
    std::vector<ClutterSource> still_alive;
    still_alive.reserve(clutter.size());
    for (ClutterSource& s : clutter) {
      Detection d;
      d.frame = frame;
      d.bbox = {s.cx + cfg.clutter_jitter * rng.normal(),
                s.cy + cfg.clutter_jitter * rng.normal(), s.w, s.h};
      d.confidence =
          std::clamp(cfg.clutter_conf_mean + cfg.clutter_conf_sd * rng.normal(), 0.01, 1.0);
      fd.detections.push_back(d);
      if (--s.remaining > 0) still_alive.push_back(s);
    }
    clutter = std::move(still_alive);

    sort_detections(fd.detections);
  }
  return out;
}

}  // namespace base
