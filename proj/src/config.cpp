#include "base/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "base/mot_io.hpp"

namespace base {

namespace {

struct KeyValueLine {
  std::string section;
  std::string key;
  std::string value;
  int line_no;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<KeyValueLine> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::vector<KeyValueLine> out;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no});
  }
  return out;
}

double parse_num(const KeyValueLine& kv, const std::string& path) {
  try {
    return std::stod(kv.value);
  } catch (const std::exception&) {
    throw DataError(path + ":" + std::to_string(kv.line_no) + ": bad number '" + kv.value +
                    "' for key '" + kv.key + "'");
  }
}

bool parse_bool(const KeyValueLine& kv, const std::string& path) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
  throw DataError(path + ":" + std::to_string(kv.line_no) + ": bad boolean '" + kv.value +
                  "' for key '" + kv.key + "'");
}

using Setter = std::function<void(const KeyValueLine&)>;

}  // namespace

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  std::map<std::string, Setter> setters;

  auto num = [&](const char* name, double* dst) {
    setters[name] = [dst, path](const KeyValueLine& kv) { *dst = parse_num(kv, path); };
  };
  auto integer = [&](const char* name, int* dst) {
    setters[name] = [dst, path](const KeyValueLine& kv) {
      *dst = static_cast<int>(parse_num(kv, path));
    };
  };
  auto boolean = [&](const char* name, bool* dst) {
    setters[name] = [dst, path](const KeyValueLine& kv) { *dst = parse_bool(kv, path); };
  };
  auto str = [&](const char* name, std::string* dst) {
    setters[name] = [dst](const KeyValueLine& kv) { *dst = kv.value; };
  };

  TrackerConfig& t = cfg.tracker;
  str("io.models", &cfg.models_path);
  str("io.output_dir", &cfg.output_dir);
  integer("io.n_conf_bins", &cfg.n_conf_bins);
  integer("io.n_width_bins", &cfg.n_width_bins);
  num("io.ratio_floor", &cfg.ratio_floor);

  num("tracker.p_g", &t.p_g);
  num("tracker.detection_threshold", &t.detection_threshold);
  integer("tracker.lookahead_frames", &t.lookahead_frames);
  integer("tracker.max_interp_gap", &t.max_interp_gap);
  num("tracker.constant_lambda", &t.constant_lambda_override);
  num("tracker.iou_gate", &t.iou_gate);
  boolean("tracker.renormalize_after_gate", &t.renormalize_after_gate);
  boolean("tracker.parallel_assoc", &t.parallel_assoc);
  setters["tracker.assoc"] = [&t, path](const KeyValueLine& kv) {
    if (kv.value == "probabilistic") t.assoc = AssocStrategy::Probabilistic;
    else if (kv.value == "iou") t.assoc = AssocStrategy::Iou;
    else if (kv.value == "traditional") t.assoc = AssocStrategy::Traditional;
    else throw DataError(path + ":" + std::to_string(kv.line_no) + ": bad assoc strategy");
  };
  setters["tracker.clutter"] = [&t, path](const KeyValueLine& kv) {
    if (kv.value == "dynamic") t.clutter = ClutterMode::Dynamic;
    else if (kv.value == "constant") t.clutter = ClutterMode::Constant;
    else throw DataError(path + ":" + std::to_string(kv.line_no) + ": bad clutter mode");
  };
  setters["tracker.confidence"] = [&t, path](const KeyValueLine& kv) {
    if (kv.value == "off") t.confidence = ConfidenceMode::Off;
    else if (kv.value == "raw") t.confidence = ConfidenceMode::Raw;
    else if (kv.value == "calibrated") t.confidence = ConfidenceMode::Calibrated;
    else throw DataError(path + ":" + std::to_string(kv.line_no) + ": bad confidence mode");
  };

  ManageParams& m = t.manage;
  num("manage.p_d", &m.p_d);
  num("manage.log_lr_confirm", &m.log_lr_confirm);
  num("manage.log_lr_delete", &m.log_lr_delete);
  integer("manage.max_coast_frames", &m.max_coast_frames);
  num("manage.ptilde_cap", &m.ptilde_cap);
  num("manage.peak_margin", &m.peak_margin);
  num("manage.init_lr_clamp", &m.init_lr_clamp);

  MotionParams& mo = t.motion;
  num("motion.sigma_ca", &mo.sigma_ca);
  num("motion.sigma_sr", &mo.sigma_sr);
  boolean("motion.distance_aware", &mo.distance_aware);
  num("motion.reference_width", &mo.reference_width);
  boolean("motion.scale_r_with_width", &mo.scale_r_with_width);

  for (const auto& kv : parse_kv_file(path)) {
    const std::string full = kv.section.empty() ? kv.key : kv.section + "." + kv.key;
    const auto it = setters.find(full);
    if (it == setters.end()) {
      throw DataError(path + ":" + std::to_string(kv.line_no) + ": unknown key '" + full +
                      "'");
    }
    it->second(kv);
  }
  return cfg;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write config file: " + path);
  const TrackerConfig& t = cfg.tracker;
  out << "[io]\n";
  out << "models = " << cfg.models_path << "\n";
  out << "output_dir = " << cfg.output_dir << "\n";
  out << "n_conf_bins = " << cfg.n_conf_bins << "\n";
  out << "n_width_bins = " << cfg.n_width_bins << "\n";
  out << "ratio_floor = " << cfg.ratio_floor << "\n";
  out << "\n[tracker]\n";
  out << "p_g = " << t.p_g << "\n";
  out << "detection_threshold = " << t.detection_threshold << "\n";
  out << "lookahead_frames = " << t.lookahead_frames << "\n";
  out << "max_interp_gap = " << t.max_interp_gap << "\n";
  out << "constant_lambda = " << t.constant_lambda_override << "\n";
  out << "iou_gate = " << t.iou_gate << "\n";
  out << "renormalize_after_gate = " << (t.renormalize_after_gate ? "true" : "false") << "\n";
  out << "parallel_assoc = " << (t.parallel_assoc ? "true" : "false") << "\n";
  out << "assoc = "
      << (t.assoc == AssocStrategy::Probabilistic
              ? "probabilistic"
              : (t.assoc == AssocStrategy::Iou ? "iou" : "traditional"))
      << "\n";
  out << "clutter = " << (t.clutter == ClutterMode::Dynamic ? "dynamic" : "constant") << "\n";
  out << "confidence = "
      << (t.confidence == ConfidenceMode::Off
              ? "off"
              : (t.confidence == ConfidenceMode::Raw ? "raw" : "calibrated"))
      << "\n";
  out << "\n[manage]\n";
  out << "p_d = " << t.manage.p_d << "\n";
  out << "log_lr_confirm = " << t.manage.log_lr_confirm << "\n";
  out << "log_lr_delete = " << t.manage.log_lr_delete << "\n";
  out << "max_coast_frames = " << t.manage.max_coast_frames << "\n";
  out << "ptilde_cap = " << t.manage.ptilde_cap << "\n";
  out << "peak_margin = " << t.manage.peak_margin << "\n";
  out << "init_lr_clamp = " << t.manage.init_lr_clamp << "\n";
  out << "\n[motion]\n";
  out << "sigma_ca = " << t.motion.sigma_ca << "\n";
  out << "sigma_sr = " << t.motion.sigma_sr << "\n";
  out << "distance_aware = " << (t.motion.distance_aware ? "true" : "false") << "\n";
  out << "reference_width = " << t.motion.reference_width << "\n";
  out << "scale_r_with_width = " << (t.motion.scale_r_with_width ? "true" : "false") << "\n";
}

SimConfig load_sim_config(const std::string& path) {
  SimConfig cfg;
  std::map<std::string, Setter> setters;
  auto num = [&](const char* name, double* dst) {
    setters[name] = [dst, path](const KeyValueLine& kv) { *dst = parse_num(kv, path); };
  };
  auto integer = [&](const char* name, int* dst) {
    setters[name] = [dst, path](const KeyValueLine& kv) {
      *dst = static_cast<int>(parse_num(kv, path));
    };
  };

  integer("sim.n_frames", &cfg.n_frames);
  integer("sim.im_width", &cfg.im_width);
  integer("sim.im_height", &cfg.im_height);
  num("sim.framerate", &cfg.framerate);
  integer("sim.n_targets", &cfg.n_targets);
  num("sim.min_width", &cfg.min_width);
  num("sim.max_width", &cfg.max_width);
  num("sim.aspect", &cfg.aspect);
  num("sim.init_speed_sd", &cfg.init_speed_sd);
  num("sim.sigma_ca", &cfg.sigma_ca);
  num("sim.sigma_sr", &cfg.sigma_sr);
  num("sim.p_d", &cfg.p_d);
  num("sim.clutter_rate", &cfg.clutter_rate);
  num("sim.clutter_width_min", &cfg.clutter_width_min);
  num("sim.clutter_width_max", &cfg.clutter_width_max);
  num("sim.clutter_width_alpha", &cfg.clutter_width_alpha);
  num("sim.clutter_persistence", &cfg.clutter_persistence);
  num("sim.clutter_jitter", &cfg.clutter_jitter);
  num("sim.inlier_conf_mean", &cfg.inlier_conf_mean);
  num("sim.inlier_conf_sd", &cfg.inlier_conf_sd);
  num("sim.clutter_conf_mean", &cfg.clutter_conf_mean);
  num("sim.clutter_conf_sd", &cfg.clutter_conf_sd);
  setters["sim.r_diag"] = [&cfg, path](const KeyValueLine& kv) {
    std::istringstream ss(kv.value);
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!(ss >> v[i])) {
        throw DataError(path + ":" + std::to_string(kv.line_no) + ": r_diag needs 4 values");
      }
    }
    cfg.r_true = Mat4::Zero();
    for (int i = 0; i < 4; ++i) cfg.r_true(i, i) = v[i];
  };
  setters["sim.birth_death"] = [&cfg, path](const KeyValueLine& kv) {
    cfg.birth_death = parse_bool(kv, path);
  };
  setters["sim.scale_speed_with_width"] = [&cfg, path](const KeyValueLine& kv) {
    cfg.scale_speed_with_width = parse_bool(kv, path);
  };
  setters["sim.seed"] = [&cfg, path](const KeyValueLine& kv) {
    cfg.seed = static_cast<uint64_t>(parse_num(kv, path));
  };

  for (const auto& kv : parse_kv_file(path)) {
    const std::string full = kv.section.empty() ? kv.key : kv.section + "." + kv.key;
    const auto it = setters.find(full);
    if (it == setters.end()) {
      throw DataError(path + ":" + std::to_string(kv.line_no) + ": unknown key '" + full +
                      "'");
    }
    it->second(kv);
  }
  return cfg;
}

}  // namespace base
