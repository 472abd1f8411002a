#pragma once

#include <string>

#include "base/simulator.hpp"
#include "base/tracker.hpp"

namespace base {

struct RunConfig {
  TrackerConfig tracker;
  std::string models_path;  // fit report file
  std::string output_dir = ".";
  // Confidence histogram defaults, used when fitting.
  int n_conf_bins = 10;
  int n_width_bins = 12;
  double ratio_floor = 0.01;
};

// Flat key=value file with [section] headers; unknown keys are rejected so
// typos in experiment sweeps fail loudly.
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

SimConfig load_sim_config(const std::string& path);

}  // namespace base
