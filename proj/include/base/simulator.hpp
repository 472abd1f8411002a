#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "base/geometry.hpp"
#include "base/motion.hpp"

namespace base {

// Deterministic sampling on top of mt19937_64. The standard distributions
// are implementation-defined, so the transforms live here and fixed seeds
// reproduce bit-identical scenes everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return (gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    // Knuth multiplication; fine for the desk-scale rates used here.
    const double l = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    return k - 1;
  }

  // Power-law density proportional to w^-alpha on [lo, hi], via inverse CDF.
  double power_law(double lo, double hi, double alpha) {
    const double u = uniform();
    if (alpha == 1.0) return lo * std::pow(hi / lo, u);
    const double a1 = 1.0 - alpha;
    return std::pow(std::pow(lo, a1) + u * (std::pow(hi, a1) - std::pow(lo, a1)), 1.0 / a1);
  }

  // Geometric lifetime with the given mean (>= 1).
  int geometric(double mean) {
    if (mean <= 1.0) return 1;
    const double p = 1.0 / mean;
    double u = uniform();
    while (u >= 1.0) u = uniform();
    return 1 + static_cast<int>(std::log(1.0 - u) / std::log(1.0 - p));
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct SimConfig {
  int n_frames = 1000;
  // Roomy default frame: border reflections flip velocities, which the
  // linear motion model (and the MLE run on top of it) cannot explain.
  int im_width = 3840;
  int im_height = 2160;
  double framerate = 30.0;

  int n_targets = 20;
  double min_width = 25.0;
  double max_width = 120.0;
  double aspect = 2.0;  // h = aspect * w for targets
  double init_speed_sd = 30.0;  // px/s, per axis
  // Larger targets start proportionally faster (heterogeneous regime); off
  // gives every target the same speed law with a known covariance.
  bool scale_speed_with_width = true;

  // Generative twins of the tracker's motion/sensor models.
  double sigma_ca = 0.05;
  double sigma_sr = 0.02;
  Mat4 r_true = (Vec4() << 1.0, 1.0, 0.5, 0.5).finished().asDiagonal();
  double p_d = 0.95;

  double clutter_rate = 10.0;  // expected clutter detections per frame
  double clutter_width_min = 10.0;
  double clutter_width_max = 250.0;
  double clutter_width_alpha = 2.0;  // skew towards small boxes
  // Mean lifetime of a clutter source in frames; 1 gives independent
  // per-frame clutter, larger values model detections that linger on
  // background structure.
  double clutter_persistence = 1.0;
  double clutter_jitter = 1.0;  // positional jitter of persistent sources, px

  double inlier_conf_mean = 0.75;
  double inlier_conf_sd = 0.15;
  double clutter_conf_mean = 0.30;
  double clutter_conf_sd = 0.15;

  // When set, targets enter and leave the scene at staggered frames instead
  // of living for the whole sequence.
  bool birth_death = false;

  uint64_t seed = 1;
};

struct SimOutput {
  std::vector<FrameData> frames;
  std::vector<GroundTruthBox> gt;
  double framerate = 30.0;
  int im_width = 0;
  int im_height = 0;
};

SimOutput simulate(const SimConfig& cfg);

}  // namespace base
