#include "base/track_management.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace base {

double ptilde(std::span<const double> track_row, double cap) {
  double miss = 1.0;
  for (double p : track_row) miss *= 1.0 - p;
  return std::min(1.0 - miss, cap);
}

double lr_step(double ptilde_value, double p_d) {
  const double num = ptilde_value + (1.0 - p_d) * (1.0 - ptilde_value);
  const double den = p_d * (1.0 - ptilde_value);
  return std::log(num / den);
}

double lr_step_blackman(const std::optional<Innovation>& associated, double p_d,
                        double lambda_c, double lr_signal) {
  if (!associated) return std::log(1.0 - p_d);
  if (lambda_c <= 0.0) {
    throw std::invalid_argument("lr_step_blackman: lambda_c must be positive");
  }
  const double lik = std::exp(log_gaussian(associated->y, associated->S));
  return std::log(std::max(p_d * lik / lambda_c * lr_signal, 1e-300));
}

void update_lifecycle(Track& t, double increment, const ManageParams& mp) {
  if (t.status == TrackStatus::Dead) return;  // Dead is absorbing

  t.log_lr = std::min(t.log_lr + increment, mp.log_lr_confirm + mp.peak_margin);
  if (t.status == TrackStatus::Tentative && t.log_lr >= mp.log_lr_confirm) {
    t.status = TrackStatus::Confirmed;
  }
  if (t.log_lr <= mp.log_lr_delete || t.frames_since_detection > mp.max_coast_frames) {
    t.status = TrackStatus::Dead;
  }
}

std::vector<Track> spawn_tracks(std::span<const Detection> unmatched_dets,
                                const MotionParams& p, const ConfidenceEval& conf,
                                int& next_id, int frame, const ManageParams& mp) {
  std::vector<Track> out;
  out.reserve(unmatched_dets.size());
  for (const Detection& z : unmatched_dets) {
    Track t;
    t.id = next_id++;
    t.state = init_track(z.bbox, p);
    // Ignoring confidence means even odds, not full trust.
    const double raw = conf.mode == ConfidenceMode::Off ? 0.5 : conf(z);
    const double c = std::clamp(raw, 1e-9, 1.0 - 1e-9);
    t.log_lr = std::clamp(std::log(c / (1.0 - c)), -mp.init_lr_clamp, mp.init_lr_clamp);
    t.status = TrackStatus::Tentative;
    t.frames_since_detection = 0;
    t.birth_frame = frame;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace base
