#include "base/metrics.hpp"

#include <map>
#include <random>

#include "doctest.h"

using namespace base;

namespace {

// Two targets over 10 frames; track 1 covers target A for frames 1-5, a new
// track 3 takes over for frames 6-10, track 2 covers B throughout.
struct SwapFixture {
  std::vector<GroundTruthBox> gt;
  std::vector<ReportedBox> rep;
};

SwapFixture id_swap_fixture() {
  SwapFixture f;
  for (int frame = 1; frame <= 10; ++frame) {
    const BoundingBox a{10.0 * frame, 50.0, 10.0, 20.0};
    const BoundingBox b{10.0 * frame, 200.0, 10.0, 20.0};
    f.gt.push_back({frame, 1, a, 1.0});
    f.gt.push_back({frame, 2, b, 1.0});
    f.rep.push_back({frame, frame <= 5 ? 1 : 3, a, 1.0, false});
    f.rep.push_back({frame, 2, b, 1.0, false});
  }
  return f;
}

}  // namespace

TEST_CASE("perfect tracking scores 1.0") {
  SwapFixture f = id_swap_fixture();
  std::vector<ReportedBox> perfect;
  for (const auto& g : f.gt) perfect.push_back({g.frame, g.target_id, g.bbox, 1.0, false});
  const MetricsReport r = evaluate(f.gt, perfect);
  CHECK(r.mota == doctest::Approx(1.0));
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
  CHECK(r.idsw == 0);
  CHECK(r.idf1 == doctest::Approx(1.0));
}

TEST_CASE("empty report scores 0") {
  SwapFixture f = id_swap_fixture();
  const MetricsReport r = evaluate(f.gt, {});
  CHECK(r.mota == doctest::Approx(0.0));
  CHECK(r.fn == static_cast<long>(f.gt.size()));
  CHECK(r.idf1 == doctest::Approx(0.0));
}

TEST_CASE("hand-counted ID swap fixture") {
  SwapFixture f = id_swap_fixture();
  const MetricsReport r = evaluate(f.gt, f.rep);
  CHECK(r.idsw == 1);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
  CHECK(r.mota == doctest::Approx(0.95));
  CHECK(r.idf1 == doctest::Approx(0.75));
}

TEST_CASE("MOTA identity holds") {
  SwapFixture f = id_swap_fixture();
  // Perturb: drop a few reported boxes and add a few false ones.
  f.rep.erase(f.rep.begin(), f.rep.begin() + 3);
  for (int k = 0; k < 4; ++k) {
    f.rep.push_back({k + 1, 99, {500.0 + 30.0 * k, 500.0, 10.0, 10.0}, 1.0, false});
  }
  const MetricsReport r = evaluate(f.gt, f.rep);
  CHECK(r.mota == doctest::Approx(1.0 - static_cast<double>(r.fp + r.fn + r.idsw) /
                                            static_cast<double>(r.gt_count)));
}

TEST_CASE("metrics are invariant to track id relabeling") {
  SwapFixture f = id_swap_fixture();
  const MetricsReport before = evaluate(f.gt, f.rep);
  std::map<int, int> relabel{{1, 17}, {2, 4}, {3, 12}};
  for (auto& b : f.rep) b.track_id = relabel[b.track_id];
  const MetricsReport after = evaluate(f.gt, f.rep);
  CHECK(before.mota == after.mota);
  CHECK(before.idsw == after.idsw);
  CHECK(before.idf1 == doctest::Approx(after.idf1));
}

TEST_CASE("MOTA can go negative") {
  std::vector<GroundTruthBox> gt{{1, 1, {10.0, 10.0, 5.0, 5.0}, 1.0}};
  std::vector<ReportedBox> rep;
  for (int k = 0; k < 5; ++k) {
    rep.push_back({1, k + 1, {100.0 + 20.0 * k, 100.0, 5.0, 5.0}, 1.0, false});
  }
  const MetricsReport r = clear_mot(gt, rep);
  CHECK(r.mota < 0.0);
}
