#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "base/estimation.hpp"
#include "base/geometry.hpp"
#include "base/simulator.hpp"
#include "base/tracker.hpp"

namespace base {

// Parse or file-layout problems; the CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseWarnings {
  std::vector<std::string> messages;
  void add(std::string msg) { messages.push_back(std::move(msg)); }
};

// MOT detection file: `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`
// with id = -1. Returns frames in ascending order with detections sorted by
// descending confidence. Out-of-range confidences are min-max normalized per
// file; degenerate boxes are dropped. Both emit warnings.
std::vector<FrameData> parse_mot_dets(const std::string& path,
                                      ParseWarnings* warnings = nullptr);

// MOT ground-truth file: `frame,id,bb_left,bb_top,bb_width,bb_height,flag,
// class,visibility`; rows with flag 0 are skipped, class filtered (empty
// filter means keep everything), visibility defaults to 1.
std::vector<GroundTruthBox> parse_mot_gt(const std::string& path,
                                         const std::set<int>& class_filter = {1},
                                         ParseWarnings* warnings = nullptr);

// Result writer: `frame,id,bb_left,bb_top,bb_width,bb_height,conf,-1,-1,-1`,
// boxes with 2-decimal formatting, IDs remapped to 1..K per sequence.
void write_results(const SequenceResult& result, const std::string& path);

std::vector<ReportedBox> parse_results(const std::string& path);

// Camera motion file: one line per frame, `w11 w12 w21 w22 t1 t2`.
// Missing tail lines become identity transforms (with a warning).
std::vector<CameraMotion> parse_cmc(const std::string& path, int n_frames,
                                    ParseWarnings* warnings = nullptr);

struct SequenceSpec {
  std::string name;
  std::string det_path;
  std::optional<std::string> gt_path;
  std::optional<std::string> cmc_path;
  double framerate = 30.0;
  int im_width = 0;
  int im_height = 0;
  int n_frames = 0;
  bool camera_stationary = false;
};

// MOT-style sequence directory: seqinfo.ini plus det/det.txt, optional
// gt/gt.txt and cmc.txt.
SequenceSpec load_sequence_spec(const std::string& dir);

SequenceData load_sequence(const SequenceSpec& spec, ParseWarnings* warnings = nullptr);

// Dumps simulator output as a MOT sequence directory, so the CLI pipeline
// runs unmodified on synthetic data.
void write_sim_sequence(const SimOutput& sim, const std::string& dir,
                        const std::string& name);

}  // namespace base
