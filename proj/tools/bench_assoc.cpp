// Compares the OpenMP association-table kernel against the serial reference
// on synthetic frame loads and checks that both produce identical tables.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "base/association.hpp"

using namespace base;
using Clock = std::chrono::steady_clock;

namespace {

struct Scene {
  std::vector<TrackState> tracks;
  std::vector<Detection> dets;
};

Scene make_scene(int n_tracks, int n_dets, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> x(0.0, 1920.0);
  std::uniform_real_distribution<double> y(0.0, 1080.0);
  std::uniform_real_distribution<double> w(15.0, 200.0);
  std::uniform_real_distribution<double> c(0.1, 1.0);

  Scene s;
  for (int i = 0; i < n_tracks; ++i) {
    TrackState t;
    const double width = w(gen);
    t.x << x(gen), y(gen), 0.0, 0.0, width, 2.0 * width;
    t.P = Mat6::Identity() * 4.0;
    s.tracks.push_back(t);
  }
  for (int j = 0; j < n_dets; ++j) {
    const double width = w(gen);
    s.dets.push_back({1, {x(gen), y(gen), width, 2.0 * width}, c(gen)});
  }
  return s;
}

double run_case(const Scene& s, const MotionParams& p, const ConfidenceEval& conf,
                const ClutterEval& clutter, bool parallel, int reps) {
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    volatile double sink = build_assoc_table(s.tracks, s.dets, p, conf, clutter, 1e-3,
                                             false, parallel)
                               .prob[0];
    (void)sink;
  }
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 50;
  if (argc > 1) reps = std::atoi(argv[1]);

  MotionParams p;
  p.R = Mat4::Identity() * 4.0;
  p.dt = 1.0 / 30.0;
  ConfidenceEval conf;
  conf.mode = ConfidenceMode::Off;
  ClutterEval clutter;
  clutter.dynamic = false;
  clutter.constant = 1e-4;

#ifdef _OPENMP
  std::printf("omp threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n");
#endif
  std::printf("%8s %8s %12s %12s %8s\n", "tracks", "dets", "serial ms", "parallel ms",
              "speedup");

  for (const auto& [nt, nd] : std::vector<std::pair<int, int>>{
           {10, 20}, {30, 40}, {100, 120}, {300, 400}}) {
    const Scene s = make_scene(nt, nd, 1000 + nt);

    const AssocTable a = build_assoc_table(s.tracks, s.dets, p, conf, clutter, 1e-3, false,
                                           true);
    const AssocTable b =
        build_assoc_table_serial(s.tracks, s.dets, p, conf, clutter, 1e-3, false);
    if (a.prob != b.prob || a.log_lik != b.log_lik || a.ex_share != b.ex_share) {
      std::fprintf(stderr, "MISMATCH between serial and parallel kernels at %dx%d\n", nt, nd);
      return 1;
    }

    const double ts = run_case(s, p, conf, clutter, false, reps);
    const double tp = run_case(s, p, conf, clutter, true, reps);
    std::printf("%8d %8d %12.3f %12.3f %7.2fx\n", nt, nd, ts, tp, ts / tp);
  }
  std::puts("serial and parallel kernels agree on all cases");
  return 0;
}
