#include "base/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "base/assignment.hpp"

namespace base {

namespace {

struct FrameIndex {
  std::map<int, std::vector<const GroundTruthBox*>> gt;
  std::map<int, std::vector<const ReportedBox*>> rep;
  std::set<int> frames;
};

FrameIndex index_frames(const std::vector<GroundTruthBox>& gt,
                        const std::vector<ReportedBox>& reported) {
  FrameIndex fi;
  for (const auto& g : gt) {
    fi.gt[g.frame].push_back(&g);
    fi.frames.insert(g.frame);
  }
  for (const auto& r : reported) {
    fi.rep[r.frame].push_back(&r);
    fi.frames.insert(r.frame);
  }
  return fi;
}

}  // namespace

MetricsReport clear_mot(const std::vector<GroundTruthBox>& gt,
                        const std::vector<ReportedBox>& reported, double iou_threshold) {
  MetricsReport rep;
  rep.gt_count = static_cast<long>(gt.size());
  const FrameIndex fi = index_frames(gt, reported);

  // gt target id -> track id of its most recent correspondence
  std::map<int, int> last_match;

  for (int frame : fi.frames) {
    const auto git = fi.gt.find(frame);
    const auto rit = fi.rep.find(frame);
    const auto& gts = git != fi.gt.end() ? git->second
                                         : std::vector<const GroundTruthBox*>{};
    const auto& reps = rit != fi.rep.end() ? rit->second
                                           : std::vector<const ReportedBox*>{};

    std::vector<char> gt_done(gts.size(), 0);
    std::vector<char> rep_done(reps.size(), 0);
    std::vector<std::pair<int, int>> correspondences;  // (gt idx, rep idx)

    // Persist previous-frame correspondences first.
    for (size_t gi = 0; gi < gts.size(); ++gi) {
      const auto lm = last_match.find(gts[gi]->target_id);
      if (lm == last_match.end()) continue;
      for (size_t ri = 0; ri < reps.size(); ++ri) {
        if (rep_done[ri] || reps[ri]->track_id != lm->second) continue;
        if (iou(gts[gi]->bbox, reps[ri]->box) >= iou_threshold) {
          correspondences.emplace_back(gi, ri);
          gt_done[gi] = 1;
          rep_done[ri] = 1;
        }
        break;
      }
    }

    // Maximum-IOU matching on the remainder.
    std::vector<int> free_gt, free_rep;
    for (size_t gi = 0; gi < gts.size(); ++gi) {
      if (!gt_done[gi]) free_gt.push_back(static_cast<int>(gi));
    }
    for (size_t ri = 0; ri < reps.size(); ++ri) {
      if (!rep_done[ri]) free_rep.push_back(static_cast<int>(ri));
    }
    if (!free_gt.empty() && !free_rep.empty()) {
      std::vector<double> cost(free_gt.size() * free_rep.size(), kInfeasible);
      for (size_t a = 0; a < free_gt.size(); ++a) {
        for (size_t b = 0; b < free_rep.size(); ++b) {
          const double v = iou(gts[free_gt[a]]->bbox, reps[free_rep[b]]->box);
          if (v >= iou_threshold) cost[a * free_rep.size() + b] = -v;
        }
      }
      const MatchResult mr = solve_matching(cost, static_cast<int>(free_gt.size()),
                                            static_cast<int>(free_rep.size()));
      for (const auto& [a, b] : mr.pairs) {
        correspondences.emplace_back(free_gt[a], free_rep[b]);
      }
    }

    for (const auto& [gi, ri] : correspondences) {
      const int tid = gts[gi]->target_id;
      const int rid = reps[ri]->track_id;
      const auto lm = last_match.find(tid);
      if (lm != last_match.end() && lm->second != rid) ++rep.idsw;
      last_match[tid] = rid;
      ++rep.matches;
    }
    rep.fn += static_cast<long>(gts.size()) - static_cast<long>(correspondences.size());
    rep.fp += static_cast<long>(reps.size()) - static_cast<long>(correspondences.size());
  }

  rep.mota = rep.gt_count > 0
                 ? 1.0 - static_cast<double>(rep.fp + rep.fn + rep.idsw) / rep.gt_count
                 : 0.0;
  return rep;
}

namespace {

struct IdComponents {
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
};

IdComponents idf1_components(const std::vector<GroundTruthBox>& gt,
                             const std::vector<ReportedBox>& reported,
                             double iou_threshold) {
  // Frames where a (gt trajectory, reported trajectory) pair overlaps.
  std::map<std::pair<int, int>, long> overlap;
  const FrameIndex fi = index_frames(gt, reported);
  for (int frame : fi.frames) {
    const auto git = fi.gt.find(frame);
    const auto rit = fi.rep.find(frame);
    if (git == fi.gt.end() || rit == fi.rep.end()) continue;
    for (const auto* g : git->second) {
      for (const auto* r : rit->second) {
        if (iou(g->bbox, r->box) >= iou_threshold) {
          ++overlap[{g->target_id, r->track_id}];
        }
      }
    }
  }

  std::vector<int> gt_ids, rep_ids;
  {
    std::set<int> gset, rset;
    for (const auto& g : gt) gset.insert(g.target_id);
    for (const auto& r : reported) rset.insert(r.track_id);
    gt_ids.assign(gset.begin(), gset.end());
    rep_ids.assign(rset.begin(), rset.end());
  }

  long idtp = 0;
  if (!gt_ids.empty() && !rep_ids.empty()) {
    std::vector<double> cost(gt_ids.size() * rep_ids.size(), kInfeasible);
    for (size_t a = 0; a < gt_ids.size(); ++a) {
      for (size_t b = 0; b < rep_ids.size(); ++b) {
        const auto it = overlap.find({gt_ids[a], rep_ids[b]});
        if (it != overlap.end() && it->second > 0) {
          cost[a * rep_ids.size() + b] = -static_cast<double>(it->second);
        }
      }
    }
    const MatchResult mr = solve_matching(cost, static_cast<int>(gt_ids.size()),
                                          static_cast<int>(rep_ids.size()));
    for (const auto& [a, b] : mr.pairs) {
      idtp += overlap.at({gt_ids[a], rep_ids[b]});
    }
  }

  IdComponents c;
  c.idtp = idtp;
  c.idfn = static_cast<long>(gt.size()) - idtp;
  c.idfp = static_cast<long>(reported.size()) - idtp;
  return c;
}

double idf1_from(const IdComponents& c) {
  const double denom = static_cast<double>(2 * c.idtp + c.idfp + c.idfn);
  return denom > 0.0 ? 2.0 * static_cast<double>(c.idtp) / denom : 0.0;
}

}  // namespace

double idf1(const std::vector<GroundTruthBox>& gt, const std::vector<ReportedBox>& reported,
            double iou_threshold) {
  return idf1_from(idf1_components(gt, reported, iou_threshold));
}

MetricsReport evaluate(const std::vector<GroundTruthBox>& gt,
                       const std::vector<ReportedBox>& reported, double iou_threshold) {
  MetricsReport rep = clear_mot(gt, reported, iou_threshold);
  const IdComponents c = idf1_components(gt, reported, iou_threshold);
  rep.idf1 = idf1_from(c);
  rep.idtp = c.idtp;
  rep.idfp = c.idfp;
  rep.idfn = c.idfn;
  return rep;
}

}  // namespace base
