#include "base/mot_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace base {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double to_double(const std::string& s, const std::string& path, int line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

std::vector<FrameData> parse_mot_dets(const std::string& path, ParseWarnings* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open detection file: " + path);

  struct Row {
    int frame;
    BoundingBox box;
    double conf;
  };
  std::vector<Row> rows;
  double conf_min = 1e300, conf_max = -1e300;
  int dropped = 0;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 7) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected >= 7 fields, got " +
                      std::to_string(fields.size()));
    }
    const int frame = static_cast<int>(to_double(fields[0], path, line_no));
    if (frame < 1) {
      throw DataError(path + ":" + std::to_string(line_no) + ": frame must be >= 1");
    }
    if (static_cast<int>(to_double(fields[1], path, line_no)) != -1) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": detection id must be -1");
    }
    const double left = to_double(fields[2], path, line_no);
    const double top = to_double(fields[3], path, line_no);
    const double w = to_double(fields[4], path, line_no);
    const double h = to_double(fields[5], path, line_no);
    const double conf = to_double(fields[6], path, line_no);
    if (w <= 0.0 || h <= 0.0) {
      ++dropped;
      continue;
    }
    rows.push_back({frame, BoundingBox{left + w / 2.0, top + h / 2.0, w, h}, conf});
    conf_min = std::min(conf_min, conf);
    conf_max = std::max(conf_max, conf);
  }
  if (dropped > 0 && warnings) {
    warnings->add(path + ": dropped " + std::to_string(dropped) +
                  " detections with non-positive size");
  }

  const bool needs_norm = !rows.empty() && (conf_min < 0.0 || conf_max > 1.0);
  if (needs_norm) {
    if (warnings) {
      warnings->add(path + ": confidences outside [0,1], applying min-max normalization");
    }
    const double span = conf_max > conf_min ? conf_max - conf_min : 1.0;
    for (auto& r : rows) r.conf = (r.conf - conf_min) / span;
  }

  std::map<int, FrameData> by_frame;
  for (const auto& r : rows) {
    FrameData& fd = by_frame[r.frame];
    fd.frame = r.frame;
    fd.detections.push_back({r.frame, r.box, r.conf});
  }
  std::vector<FrameData> out;
  out.reserve(by_frame.size());
  for (auto& [frame, fd] : by_frame) {
    sort_detections(fd.detections);
    out.push_back(std::move(fd));
  }
  return out;
}

std::vector<GroundTruthBox> parse_mot_gt(const std::string& path,
                                         const std::set<int>& class_filter,
                                         ParseWarnings* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ground-truth file: " + path);

  std::vector<GroundTruthBox> out;
  std::string line;
  int line_no = 0;
  int dropped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 6) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected >= 6 fields, got " +
                      std::to_string(fields.size()));
    }
    GroundTruthBox g;
    g.frame = static_cast<int>(to_double(fields[0], path, line_no));
    g.target_id = static_cast<int>(to_double(fields[1], path, line_no));
    const double left = to_double(fields[2], path, line_no);
    const double top = to_double(fields[3], path, line_no);
    const double w = to_double(fields[4], path, line_no);
    const double h = to_double(fields[5], path, line_no);
    if (fields.size() >= 7) {
      const int flag = static_cast<int>(to_double(fields[6], path, line_no));
      if (flag == 0) continue;
    }
    if (fields.size() >= 8 && !class_filter.empty()) {
      const int cls = static_cast<int>(to_double(fields[7], path, line_no));
      if (!class_filter.count(cls)) continue;
    }
    g.visibility = fields.size() >= 9 ? to_double(fields[8], path, line_no) : 1.0;
    if (w <= 0.0 || h <= 0.0) {
      ++dropped;
      continue;
    }
    g.bbox = BoundingBox{left + w / 2.0, top + h / 2.0, w, h};
    out.push_back(g);
  }
  if (dropped > 0 && warnings) {
    warnings->add(path + ": dropped " + std::to_string(dropped) +
                  " ground-truth boxes with non-positive size");
  }
  std::stable_sort(out.begin(), out.end(), [](const GroundTruthBox& a, const GroundTruthBox& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.target_id < b.target_id;
  });
  return out;
}

void write_results(const SequenceResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write results file: " + path);

  // Contiguous IDs in order of first appearance.
  std::map<int, int> id_map;
  for (const auto& b : result.boxes) {
    if (!id_map.count(b.track_id)) {
      const int next = static_cast<int>(id_map.size()) + 1;
      id_map[b.track_id] = next;
    }
  }

  char buf[256];
  for (const auto& b : result.boxes) {
    const auto c = b.box.corners();
    std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.6f,-1,-1,-1\n", b.frame,
                  id_map[b.track_id], c[0], c[1], b.box.w, b.box.h, b.confidence);
    out << buf;
  }
}

std::vector<ReportedBox> parse_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results file: " + path);
  std::vector<ReportedBox> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 7) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected >= 7 fields");
    }
    ReportedBox b;
    b.frame = static_cast<int>(to_double(fields[0], path, line_no));
    b.track_id = static_cast<int>(to_double(fields[1], path, line_no));
    const double left = to_double(fields[2], path, line_no);
    const double top = to_double(fields[3], path, line_no);
    const double w = to_double(fields[4], path, line_no);
    const double h = to_double(fields[5], path, line_no);
    b.box = BoundingBox{left + w / 2.0, top + h / 2.0, w, h};
    b.confidence = to_double(fields[6], path, line_no);
    out.push_back(b);
  }
  return out;
}

std::vector<CameraMotion> parse_cmc(const std::string& path, int n_frames,
                                    ParseWarnings* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open camera-motion file: " + path);

  std::vector<CameraMotion> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line) && static_cast<int>(out.size()) < n_frames) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    double v[6];
    for (int i = 0; i < 6; ++i) {
      if (!(ss >> v[i])) {
        throw DataError(path + ":" + std::to_string(line_no) + ": expected 6 floats");
      }
    }
    CameraMotion cm;
    cm.warp << v[0], v[1], v[2], v[3];
    cm.translation << v[4], v[5];
    out.push_back(cm);
  }
  if (static_cast<int>(out.size()) < n_frames) {
    if (warnings) {
      warnings->add(path + ": " + std::to_string(n_frames - out.size()) +
                    " trailing frames without camera motion, using identity");
    }
    out.resize(n_frames);
  }
  return out;
}

SequenceSpec load_sequence_spec(const std::string& dir) {
  const fs::path root(dir);
  const fs::path ini = root / "seqinfo.ini";
  std::ifstream in(ini);
  if (!in) throw DataError("cannot open " + ini.string());

  SequenceSpec spec;
  spec.name = root.filename().string();
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '[' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "name") spec.name = value;
    else if (key == "frameRate") spec.framerate = std::stod(value);
    else if (key == "seqLength") spec.n_frames = std::stoi(value);
    else if (key == "imWidth") spec.im_width = std::stoi(value);
    else if (key == "imHeight") spec.im_height = std::stoi(value);
    else if (key == "camStationary") spec.camera_stationary = std::stoi(value) != 0;
    // other seqinfo keys (imDir, imExt, ...) are irrelevant here
  }
  if (spec.framerate <= 0.0) throw DataError(ini.string() + ": frameRate must be > 0");

  const fs::path det = root / "det" / "det.txt";
  if (!fs::exists(det)) throw DataError("missing detection file: " + det.string());
  spec.det_path = det.string();
  if (const fs::path gt = root / "gt" / "gt.txt"; fs::exists(gt)) spec.gt_path = gt.string();
  if (const fs::path cmc = root / "cmc.txt"; fs::exists(cmc)) spec.cmc_path = cmc.string();
  return spec;
}

SequenceData load_sequence(const SequenceSpec& spec, ParseWarnings* warnings) {
  SequenceData seq;
  seq.name = spec.name;
  seq.framerate = spec.framerate;
  seq.im_width = spec.im_width;
  seq.im_height = spec.im_height;
  seq.camera_stationary = spec.camera_stationary;

  const auto det_frames = parse_mot_dets(spec.det_path, warnings);
  int max_frame = spec.n_frames;
  for (const auto& fd : det_frames) max_frame = std::max(max_frame, fd.frame);

  std::vector<CameraMotion> cmc(max_frame);
  if (spec.cmc_path) cmc = parse_cmc(*spec.cmc_path, max_frame, warnings);

  // Dense frame list; frames without detections still advance the filter.
  seq.frames.resize(max_frame);
  for (int f = 1; f <= max_frame; ++f) {
    seq.frames[f - 1].frame = f;
    seq.frames[f - 1].timestamp = (f - 1) / spec.framerate;
    seq.frames[f - 1].camera_motion = cmc[f - 1];
  }
  for (const auto& fd : det_frames) {
    seq.frames[fd.frame - 1].detections = fd.detections;
  }

  if (spec.gt_path) seq.gt = parse_mot_gt(*spec.gt_path, {1}, warnings);
  return seq;
}

void write_sim_sequence(const SimOutput& sim, const std::string& dir,
                        const std::string& name) {
  const fs::path root = fs::path(dir) / name;
  fs::create_directories(root / "det");
  fs::create_directories(root / "gt");

  {
    std::ofstream ini(root / "seqinfo.ini");
    if (!ini) throw DataError("cannot write " + (root / "seqinfo.ini").string());
    ini << "[Sequence]\n";
    ini << "name=" << name << "\n";
    ini << "imDir=img1\n";
    ini << "frameRate=" << sim.framerate << "\n";
    ini << "seqLength=" << sim.frames.size() << "\n";
    ini << "imWidth=" << sim.im_width << "\n";
    ini << "imHeight=" << sim.im_height << "\n";
    ini << "imExt=.jpg\n";
    ini << "camStationary=1\n";
  }
  {
    std::ofstream det(root / "det" / "det.txt");
    if (!det) throw DataError("cannot write detections under " + root.string());
    char buf[256];
    for (const auto& fd : sim.frames) {
      for (const auto& d : fd.detections) {
        const auto c = d.bbox.corners();
        std::snprintf(buf, sizeof(buf), "%d,-1,%.2f,%.2f,%.2f,%.2f,%.6f,-1,-1,-1\n", fd.frame,
                      c[0], c[1], d.bbox.w, d.bbox.h, d.confidence);
        det << buf;
      }
    }
  }
  {
    std::ofstream gt(root / "gt" / "gt.txt");
    if (!gt) throw DataError("cannot write ground truth under " + root.string());
    char buf[256];
    for (const auto& g : sim.gt) {
      const auto c = g.bbox.corners();
      std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,1,1,%.2f\n", g.frame,
                    g.target_id, c[0], c[1], g.bbox.w, g.bbox.h, g.visibility);
      gt << buf;
    }
  }
}

}  // namespace base
