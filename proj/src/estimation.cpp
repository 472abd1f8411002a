#include "base/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "base/metrics.hpp"

namespace base {

namespace {

std::map<int, std::vector<const GroundTruthBox*>> gt_by_frame(const SequenceData& seq) {
  std::map<int, std::vector<const GroundTruthBox*>> m;
  for (const auto& g : seq.gt) m[g.frame].push_back(&g);
  return m;
}

Vec4 box_vec(const BoundingBox& b) {
  Vec4 v;
  v << b.cx, b.cy, b.w, b.h;
  return v;
}

}  // namespace

std::vector<std::pair<int, int>> match_gt(const std::vector<Detection>& dets,
                                          const std::vector<GroundTruthBox>& gts,
                                          double iou_threshold, double min_visibility) {
  std::vector<int> visible;
  for (size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].visibility >= min_visibility) visible.push_back(static_cast<int>(g));
  }

  std::vector<std::pair<int, int>> out;
  if (dets.empty() || visible.empty()) return out;

  std::vector<double> best_for_det(dets.size(), iou_threshold);
  std::vector<int> arg_det(dets.size(), -1);
  std::vector<double> best_for_gt(visible.size(), iou_threshold);
  std::vector<int> arg_gt(visible.size(), -1);

  for (size_t d = 0; d < dets.size(); ++d) {
    for (size_t v = 0; v < visible.size(); ++v) {
      const double ov = iou(dets[d].bbox, gts[visible[v]].bbox);
      if (ov > best_for_det[d]) {
        best_for_det[d] = ov;
        arg_det[d] = static_cast<int>(v);
      }
      if (ov > best_for_gt[v]) {
        best_for_gt[v] = ov;
        arg_gt[v] = static_cast<int>(d);
      }
    }
  }
  for (size_t d = 0; d < dets.size(); ++d) {
    const int v = arg_det[d];
    if (v >= 0 && arg_gt[v] == static_cast<int>(d)) {
      out.emplace_back(static_cast<int>(d), visible[v]);
    }
  }
  return out;
}

Mat2 estimate_pcr(const TrainingSet& ts, long* n_targets) {
  Mat4 sum = Mat4::Zero();
  long n_g = 0;
  for (const auto& seq : ts.sequences) {
    if (!seq.camera_stationary) continue;
    // First and second appearance per target.
    std::map<int, std::pair<const GroundTruthBox*, const GroundTruthBox*>> first_two;
    std::map<int, int> seen;
    for (const auto& g : seq.gt) {
      auto& cnt = seen[g.target_id];
      if (cnt == 0) {
        first_two[g.target_id].first = &g;
      } else if (cnt == 1) {
        first_two[g.target_id].second = &g;
      }
      ++cnt;
    }
    for (const auto& [id, pair] : first_two) {
      if (seen[id] < 2) continue;
      const GroundTruthBox* a = pair.first;
      const GroundTruthBox* b = pair.second;
      const double dt = (b->frame - a->frame) / seq.framerate;
      if (dt <= 0.0) continue;
      const Vec4 rate = (box_vec(b->bbox) - box_vec(a->bbox)) / dt;
      sum += rate * rate.transpose();
      ++n_g;
    }
  }
  if (n_targets) *n_targets = n_g;
  if (n_g < 2) throw std::runtime_error("estimate_pcr: need at least 2 targets");
  const Mat4 full = sum / static_cast<double>(n_g - 1);
  return full.block<2, 2>(0, 0);
}

Mat4 estimate_r(const TrainingSet& ts, long* n_samples) {
  Mat4 sum = Mat4::Zero();
  long n_a = 0;
  for (const auto& seq : ts.sequences) {
    if (!seq.camera_stationary) continue;
    const auto gtf = gt_by_frame(seq);
    for (const auto& fd : seq.frames) {
      const auto it = gtf.find(fd.frame);
      if (it == gtf.end()) continue;
      std::vector<GroundTruthBox> gts;
      gts.reserve(it->second.size());
      for (const auto* g : it->second) gts.push_back(*g);
      for (const auto& [d, g] : match_gt(fd.detections, gts)) {
        const Vec4 res = box_vec(fd.detections[d].bbox) - box_vec(gts[g].bbox);
        sum += res * res.transpose();
        ++n_a;
      }
    }
  }
  if (n_samples) *n_samples = n_a;
  if (n_a < 2) throw std::runtime_error("estimate_r: need at least 2 matched detections");
  return sum / static_cast<double>(n_a - 1);
}

std::vector<Tracklet> build_tracklets(const TrainingSet& ts, int min_length) {
  std::vector<Tracklet> out;
  for (const auto& seq : ts.sequences) {
    const auto gtf = gt_by_frame(seq);
    std::map<int, Tracklet> by_target;
    for (const auto& fd : seq.frames) {
      const auto it = gtf.find(fd.frame);
      if (it == gtf.end()) continue;
      std::vector<GroundTruthBox> gts;
      gts.reserve(it->second.size());
      for (const auto* g : it->second) gts.push_back(*g);
      for (const auto& [d, g] : match_gt(fd.detections, gts)) {
        auto& tl = by_target[gts[g].target_id];
        tl.framerate = seq.framerate;
        tl.dets.push_back(fd.detections[d]);
      }
    }
    for (auto& [id, tl] : by_target) {
      if (static_cast<int>(tl.dets.size()) >= min_length) out.push_back(std::move(tl));
    }
  }
  return out;
}

double tracklet_log_likelihood(const std::vector<Tracklet>& tracklets, const Mat4& r,
                               const Mat2& p_cr, double sigma_ca, double sigma_sr) {
  std::vector<double> per_tracklet(tracklets.size(), 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int t = 0; t < static_cast<int>(tracklets.size()); ++t) {
    const Tracklet& tl = tracklets[t];
    MotionParams p;
    p.sigma_ca = sigma_ca;
    p.sigma_sr = sigma_sr;
    p.R = r;
    p.P_cr = p_cr;
    p.dt = 1.0 / tl.framerate;

    TrackState s = init_track(tl.dets.front().bbox, p);
    int prev_frame = tl.dets.front().frame;
    double ll = 0.0;
    const CameraMotion identity;
    for (size_t k = 1; k < tl.dets.size(); ++k) {
      // Coast frame-by-frame across detection gaps, as the tracker would.
      for (int f = prev_frame; f < tl.dets[k].frame; ++f) {
        s = predict(s, p, identity);
      }
      const Innovation inn = innovation(s, tl.dets[k].bbox, p);
      ll += log_gaussian(inn.y, inn.S);
      s = kf_update(s, tl.dets[k].bbox, p);
      prev_frame = tl.dets[k].frame;
    }
    per_tracklet[t] = ll;
  }

  double total = 0.0;
  for (double v : per_tracklet) total += v;  // fixed order, thread-count independent
  return total;
}

std::pair<double, double> mle_sigmas(const std::vector<Tracklet>& tracklets, const Mat4& r,
                                     const Mat2& p_cr, int rounds, int grid,
                                     std::vector<double>* loglik_trace) {
  if (tracklets.empty()) throw std::runtime_error("mle_sigmas: no tracklets");

  double lo_ca = std::log(1e-4), hi_ca = std::log(1.0);
  double lo_sr = std::log(1e-4), hi_sr = std::log(1.0);
  double best_ca = 0.0, best_sr = 0.0;

  for (int round = 0; round < rounds; ++round) {
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid; ++a) {
      const double lca = lo_ca + (hi_ca - lo_ca) * a / (grid - 1);
      for (int b = 0; b < grid; ++b) {
        const double lsr = lo_sr + (hi_sr - lo_sr) * b / (grid - 1);
        const double ll =
            tracklet_log_likelihood(tracklets, r, p_cr, std::exp(lca), std::exp(lsr));
        if (ll > best_ll) {
          best_ll = ll;
          best_ca = lca;
          best_sr = lsr;
        }
      }
    }
    if (loglik_trace) loglik_trace->push_back(best_ll);
    // Zoom in around the incumbent for the next pass.
    const double span_ca = (hi_ca - lo_ca) / (grid - 1);
    const double span_sr = (hi_sr - lo_sr) / (grid - 1);
    lo_ca = best_ca - 1.5 * span_ca;
    hi_ca = best_ca + 1.5 * span_ca;
    lo_sr = best_sr - 1.5 * span_sr;
    hi_sr = best_sr + 1.5 * span_sr;
  }
  return {std::exp(best_ca), std::exp(best_sr)};
}

double search_cex(const TrainingSet& ts, const FitReport& fit, const TrackerConfig& cfg,
                  std::vector<std::pair<double, double>>* trace) {
  double best_cex = 1.0;
  double best_mota = -std::numeric_limits<double>::infinity();
  for (int k = -6; k <= 6; ++k) {  // 10^-3 .. 10^3, half-decade steps
    const double cex = std::pow(10.0, 0.5 * k);
    ClutterModel cm = fit.clutter;
    cm.c_ex = cex;

    long gt_total = 0;
    double weighted = 0.0;
    for (const auto& seq : ts.sequences) {
      TrackerConfig c = cfg;
      c.motion.R = fit.r;
      c.motion.P_cr = fit.p_cr;
      c.motion.sigma_ca = fit.sigma_ca;
      c.motion.sigma_sr = fit.sigma_sr;
      c.motion.dt = 1.0 / seq.framerate;
      const SequenceResult res = run_tracker(seq.frames, c, &fit.confidence, &cm);
      const MetricsReport rep = clear_mot(seq.gt, res.boxes);
      weighted += rep.mota * static_cast<double>(rep.gt_count);
      gt_total += rep.gt_count;
    }
    const double mota = gt_total > 0 ? weighted / static_cast<double>(gt_total) : 0.0;
    if (trace) trace->emplace_back(cex, mota);
    if (mota >= best_mota) {  // ties resolve to the larger scale
      best_mota = mota;
      best_cex = cex;
    }
  }
  return best_cex;
}

FitReport fit_all(const TrainingSet& ts, const TrackerConfig& cfg) {
  FitReport fit;
  fit.p_cr = estimate_pcr(ts, &fit.n_pcr_targets);
  fit.r = estimate_r(ts, &fit.n_r_samples);

  std::vector<Detection> all_dets;
  std::vector<Detection> inlier_dets;
  long total_frames = 0;
  for (const auto& seq : ts.sequences) {
    const auto gtf = gt_by_frame(seq);
    total_frames += static_cast<long>(seq.frames.size());
    for (const auto& fd : seq.frames) {
      all_dets.insert(all_dets.end(), fd.detections.begin(), fd.detections.end());
      const auto it = gtf.find(fd.frame);
      if (it == gtf.end()) continue;
      std::vector<GroundTruthBox> gts;
      gts.reserve(it->second.size());
      for (const auto* g : it->second) gts.push_back(*g);
      for (const auto& [d, g] : match_gt(fd.detections, gts)) {
        inlier_dets.push_back(fd.detections[d]);
      }
    }
  }
  fit.confidence = fit_confidence(inlier_dets, all_dets);
  fit.clutter = fit_width_density(all_dets, static_cast<int>(total_frames));

  const auto tracklets = build_tracklets(ts);
  fit.n_tracklets = static_cast<long>(tracklets.size());
  std::tie(fit.sigma_ca, fit.sigma_sr) =
      mle_sigmas(tracklets, fit.r, fit.p_cr, 3, 9, &fit.mle_loglik_trace);

  fit.clutter.c_ex = search_cex(ts, fit, cfg, &fit.cex_trace);
  return fit;
}

void save_fit_report(const FitReport& fit, std::ostream& os) {
  os.precision(17);
  os << "basemodel v1 fit\n";
  os << "sigma_ca: " << fit.sigma_ca << '\n';
  os << "sigma_sr: " << fit.sigma_sr << '\n';
  os << "R:";
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) os << ' ' << fit.r(i, j);
  }
  os << '\n';
  os << "P_cr:";
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) os << ' ' << fit.p_cr(i, j);
  }
  os << '\n';
  os << "counts: " << fit.n_pcr_targets << ' ' << fit.n_r_samples << ' ' << fit.n_tracklets
     << '\n';
  os << "cex_trace:";
  for (const auto& [c, m] : fit.cex_trace) os << ' ' << c << ' ' << m;
  os << '\n';
  os << "mle_trace:";
  for (double v : fit.mle_loglik_trace) os << ' ' << v;
  os << '\n';
  save_confidence_model(fit.confidence, os);
  save_clutter_model(fit.clutter, os);
}

FitReport load_fit_report(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "basemodel v1 fit") {
    throw std::runtime_error("fit report: bad header");
  }
  FitReport fit;
  auto read_values = [&](const std::string& key) {
    if (!std::getline(is, line) || line.rfind(key, 0) != 0) {
      throw std::runtime_error("fit report: expected '" + key + "'");
    }
    std::istringstream ss(line.substr(key.size()));
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    return v;
  };
  fit.sigma_ca = read_values("sigma_ca:").at(0);
  fit.sigma_sr = read_values("sigma_sr:").at(0);
  const auto r = read_values("R:");
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) fit.r(i, j) = r.at(i * 4 + j);
  }
  const auto pcr = read_values("P_cr:");
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) fit.p_cr(i, j) = pcr.at(i * 2 + j);
  }
  const auto counts = read_values("counts:");
  fit.n_pcr_targets = static_cast<long>(counts.at(0));
  fit.n_r_samples = static_cast<long>(counts.at(1));
  fit.n_tracklets = static_cast<long>(counts.at(2));
  const auto trace = read_values("cex_trace:");
  for (size_t i = 0; i + 1 < trace.size(); i += 2) {
    fit.cex_trace.emplace_back(trace[i], trace[i + 1]);
  }
  fit.mle_loglik_trace = read_values("mle_trace:");
  fit.confidence = load_confidence_model(is);
  fit.clutter = load_clutter_model(is);
  return fit;
}

}  // namespace base
