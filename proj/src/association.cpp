#include "base/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "base/assignment.hpp"

namespace base {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct TrackCache {
  Vec4 hx;
  Mat4 S;
  Eigen::LLT<Mat4> llt;
  double log_det = 0.0;
  bool jitter = false;
};

TrackCache make_track_cache(const TrackState& s, const MotionParams& p) {
  TrackCache c;
  const Mat46 h = measurement_matrix();
  c.hx = h * s.x;
  c.S = effective_r(p, s.x(4)) + h * s.P * h.transpose();
  c.S = 0.5 * (c.S + c.S.transpose()).eval();
  c.llt.compute(c.S);
  if (c.llt.info() != Eigen::Success) {
    c.S += Mat4::Identity() * (1e-9 * c.S.trace() / 4.0);
    c.llt.compute(c.S);
    c.jitter = true;
  }
  for (int i = 0; i < 4; ++i) c.log_det += 2.0 * std::log(c.llt.matrixL()(i, i));
  return c;
}

double pair_log_lik(const TrackCache& c, const Detection& z, double log_conf) {
  Vec4 zv;
  zv << z.bbox.cx, z.bbox.cy, z.bbox.w, z.bbox.h;
  const Vec4 y = zv - c.hx;
  const Vec4 alpha = c.llt.matrixL().solve(y);
  constexpr double kLog2Pi = 1.8378770664093454836;
  return -0.5 * (4.0 * kLog2Pi + c.log_det + alpha.squaredNorm()) + log_conf;
}

AssocTable build_table_impl(std::span<const TrackState> tracks,
                            std::span<const Detection> dets, const MotionParams& p,
                            const ConfidenceEval& conf, const ClutterEval& clutter,
                            double p_g, bool renormalize_after_gate, bool parallel) {
  AssocTable t;
  t.n_tracks = static_cast<int>(tracks.size());
  t.n_dets = static_cast<int>(dets.size());
  const size_t n_pairs = static_cast<size_t>(t.n_tracks) * t.n_dets;
  t.log_lik.assign(n_pairs, kNegInf);
  t.prob.assign(n_pairs, 0.0);
  t.prob_pregate.assign(n_pairs, 0.0);
  t.gated.assign(n_pairs, 0);
  t.inno.resize(n_pairs);
  t.lambda.assign(t.n_dets, 0.0);
  t.ex_share.assign(t.n_dets, 0.0);

  for (int j = 0; j < t.n_dets; ++j) t.lambda[j] = clutter(dets[j]);

  std::vector<TrackCache> caches(tracks.size());
  std::vector<double> log_conf(dets.size());
  for (int j = 0; j < t.n_dets; ++j) {
    log_conf[j] = std::log(std::max(conf(dets[j]), 1e-300));
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (int i = 0; i < t.n_tracks; ++i) {
    caches[i] = make_track_cache(tracks[i], p);
  }

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static) if (parallel)
#endif
  for (int i = 0; i < t.n_tracks; ++i) {
    for (int j = 0; j < t.n_dets; ++j) {
      const size_t k = t.idx(i, j);
      t.log_lik[k] = pair_log_lik(caches[i], dets[j], log_conf[j]);
      Vec4 zv;
      zv << dets[j].bbox.cx, dets[j].bbox.cy, dets[j].bbox.w, dets[j].bbox.h;
      t.inno[k].y = zv - caches[i].hx;
      t.inno[k].S = caches[i].S;
      t.inno[k].jitter_applied = caches[i].jitter;
    }
  }

  // Per-detection normalization against the extraneous density. Serial and
  // in fixed order: results do not depend on the thread count.
  for (int j = 0; j < t.n_dets; ++j) {
    const double log_lambda = t.lambda[j] > 0.0 ? std::log(t.lambda[j]) : kNegInf;
    double m = log_lambda;
    for (int i = 0; i < t.n_tracks; ++i) m = std::max(m, t.log_lik[t.idx(i, j)]);
    if (m == kNegInf) continue;  // nothing explains this detection

    const double r_lambda = log_lambda == kNegInf ? 0.0 : std::exp(log_lambda - m);
    double denom = r_lambda;
    for (int i = 0; i < t.n_tracks; ++i) denom += std::exp(t.log_lik[t.idx(i, j)] - m);

    for (int i = 0; i < t.n_tracks; ++i) {
      t.prob_pregate[t.idx(i, j)] = std::exp(t.log_lik[t.idx(i, j)] - m) / denom;
    }
    t.ex_share[j] = r_lambda / denom;
  }
  t.prob = t.prob_pregate;

  gate(t, p_g, renormalize_after_gate);
  return t;
}

}  // namespace

double ConfidenceEval::operator()(const Detection& z) const {
  switch (mode) {
    case ConfidenceMode::Off:
      return 1.0;
    case ConfidenceMode::Raw:
      return std::max(z.confidence, 1e-6);
    case ConfidenceMode::Calibrated:
      return model ? conf_likelihood(*model, z.confidence, z.bbox.w) : 1.0;
  }
  return 1.0;
}

double joint_log_likelihood(const TrackState& s, const Detection& z, const MotionParams& p,
                            const ConfidenceEval& conf) {
  const Innovation inn = innovation(s, z.bbox, p);
  return log_gaussian(inn.y, inn.S) + std::log(std::max(conf(z), 1e-300));
}

AssocTable build_assoc_table(std::span<const TrackState> tracks,
                             std::span<const Detection> dets, const MotionParams& p,
                             const ConfidenceEval& conf, const ClutterEval& clutter,
                             double p_g, bool renormalize_after_gate, bool parallel) {
  return build_table_impl(tracks, dets, p, conf, clutter, p_g, renormalize_after_gate,
                          parallel);
}

AssocTable build_assoc_table_serial(std::span<const TrackState> tracks,
                                    std::span<const Detection> dets, const MotionParams& p,
                                    const ConfidenceEval& conf, const ClutterEval& clutter,
                                    double p_g, bool renormalize_after_gate) {
  return build_table_impl(tracks, dets, p, conf, clutter, p_g, renormalize_after_gate,
                          false);
}

double gate_threshold(double p_g) {
  const double pg = std::clamp(p_g, 0.0, 1.0 - 1e-12);
  return pg / (1.0 - pg);
}

void gate(AssocTable& table, double p_g, bool renormalize) {
  const double tau = gate_threshold(p_g);
  for (int i = 0; i < table.n_tracks; ++i) {
    for (int j = 0; j < table.n_dets; ++j) {
      const size_t k = table.idx(i, j);
      table.gated[k] = table.prob_pregate[k] >= tau ? 1 : 0;
      table.prob[k] = table.gated[k] ? table.prob_pregate[k] : 0.0;
    }
  }
  if (!renormalize) return;

  // Optional variant: drop pruned pairs from the denominator as well.
  for (int j = 0; j < table.n_dets; ++j) {
    double m = table.lambda[j] > 0.0 ? std::log(table.lambda[j]) : kNegInf;
    for (int i = 0; i < table.n_tracks; ++i) {
      if (table.gated[table.idx(i, j)]) m = std::max(m, table.log_lik[table.idx(i, j)]);
    }
    if (m == kNegInf) continue;
    const double r_lambda =
        table.lambda[j] > 0.0 ? std::exp(std::log(table.lambda[j]) - m) : 0.0;
    double denom = r_lambda;
    for (int i = 0; i < table.n_tracks; ++i) {
      if (table.gated[table.idx(i, j)]) denom += std::exp(table.log_lik[table.idx(i, j)] - m);
    }
    for (int i = 0; i < table.n_tracks; ++i) {
      const size_t k = table.idx(i, j);
      table.prob[k] = table.gated[k] ? std::exp(table.log_lik[k] - m) / denom : 0.0;
    }
    table.ex_share[j] = r_lambda / denom;
  }
}

Assignment solve_assignment(const AssocTable& table, double p_g) {
  const double log_tau = std::log(std::max(gate_threshold(p_g), 1e-12));

  std::vector<double> cost(static_cast<size_t>(table.n_tracks) * table.n_dets, kInfeasible);
  for (int i = 0; i < table.n_tracks; ++i) {
    for (int j = 0; j < table.n_dets; ++j) {
      const size_t k = table.idx(i, j);
      if (table.gated[k] && table.prob[k] > 0.0) {
        cost[k] = log_tau - std::log(table.prob[k]);
      }
    }
  }

  const MatchResult m = solve_matching(cost, table.n_tracks, table.n_dets);
  Assignment a;
  a.pairs = m.pairs;
  a.unmatched_tracks = m.unmatched_rows;
  a.unmatched_dets = m.unmatched_cols;
  return a;
}

bool baseline_gate_traditional(const Vec4& y, const Mat4& S, double lambda_c,
                               double lambda_nt, double p_g) {
  const double threshold = (1.0 - p_g) / p_g;
  if (threshold <= 0.0) return true;  // p_g -> 1 keeps everything finite
  // Log-space comparison; the density underflows for distant pairs.
  return log_gaussian(y, S) - std::log(lambda_c + lambda_nt) >= std::log(threshold);
}

double baseline_score_traditional(const Vec4& y, const Mat4& S) {
  Eigen::LLT<Mat4> llt(S);
  const Vec4 alpha = llt.matrixL().solve(y);
  double log_det = 0.0;
  for (int i = 0; i < 4; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return alpha.squaredNorm() + log_det;
}

double baseline_score_iou(const TrackState& s, const Detection& z) {
  return 1.0 - iou(state_box(s), z.bbox);
}

BoundingBox state_box(const TrackState& s) { return {s.x(0), s.x(1), s.x(4), s.x(5)}; }

}  // namespace base
