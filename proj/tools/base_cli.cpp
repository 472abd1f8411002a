#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "base/config.hpp"
#include "base/estimation.hpp"
#include "base/metrics.hpp"
#include "base/mot_io.hpp"
#include "base/simulator.hpp"
#include "base/tracker.hpp"

namespace fs = std::filesystem;
using namespace base;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void print_warnings(const ParseWarnings& w) {
  for (const auto& msg : w.messages) std::cerr << "warning: " << msg << "\n";
}

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("BASE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

FitReport load_models(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  return load_fit_report(in);
}

TrackerConfig with_models(TrackerConfig cfg, const FitReport& fit, double framerate) {
  cfg.motion.R = fit.r;
  cfg.motion.P_cr = fit.p_cr;
  cfg.motion.sigma_ca = fit.sigma_ca;
  cfg.motion.sigma_sr = fit.sigma_sr;
  cfg.motion.dt = 1.0 / framerate;
  return cfg;
}

std::vector<SequenceData> load_sequences(const std::vector<std::string>& dirs,
                                         ParseWarnings* warnings) {
  std::vector<SequenceData> out;
  for (const auto& dir : dirs) {
    out.push_back(load_sequence(load_sequence_spec(dir), warnings));
  }
  return out;
}

// A dataset root is either one sequence directory or a directory of them;
// sequences are recognized by their seqinfo.ini.
std::vector<std::string> expand_dataset_dir(const std::string& root) {
  std::vector<std::string> dirs;
  if (fs::exists(fs::path(root) / "seqinfo.ini")) {
    dirs.push_back(root);
    return dirs;
  }
  if (fs::is_directory(root)) {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "seqinfo.ini")) {
        dirs.push_back(entry.path().string());
      }
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw DataError("no sequences (seqinfo.ini) found under " + root);
  return dirs;
}

void write_diagnostics(const SequenceResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write diagnostics file: " + path);
  out << "frame,tracks_in,dets,dets_dropped,matched,spawned,confirmed,cmc_rejected,wall_ms\n";
  for (const auto& d : res.diagnostics) {
    out << d.frame << ',' << d.n_tracks_in << ',' << d.n_dets << ',' << d.n_dets_dropped
        << ',' << d.n_matched << ',' << d.n_spawned << ',' << d.n_confirmed << ','
        << (d.cmc_rejected ? 1 : 0) << ',' << d.wall_ms << '\n';
  }
}

int cmd_track(const std::string& config_path, const std::string& models_flag,
              const std::vector<std::string>& seq_dirs, const std::string& out_flag) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  if (!models_flag.empty()) cfg.models_path = models_flag;
  if (!out_flag.empty()) cfg.output_dir = out_flag;
  if (cfg.models_path.empty()) {
    throw DataError("no model file given (io.models in the config or --models)");
  }
  const FitReport fit = load_models(cfg.models_path);
  fs::create_directories(cfg.output_dir);

  ParseWarnings warnings;
  const std::vector<SequenceData> seqs = load_sequences(seq_dirs, &warnings);
  print_warnings(warnings);

  std::vector<std::string> lines(seqs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < static_cast<int>(seqs.size()); ++i) {
    const SequenceData& seq = seqs[i];
    const TrackerConfig tc = with_models(cfg.tracker, fit, seq.framerate);
    const SequenceResult res = run_tracker(seq.frames, tc, &fit.confidence, &fit.clutter);
    const std::string res_path = (fs::path(cfg.output_dir) / (seq.name + ".txt")).string();
    write_results(res, res_path);
    write_diagnostics(res, (fs::path(cfg.output_dir) / (seq.name + "_diag.csv")).string());

    double total_ms = 0.0;
    for (const auto& d : res.diagnostics) total_ms += d.wall_ms;
    lines[i] = seq.name + ": " + std::to_string(res.boxes.size()) + " boxes over " +
               std::to_string(res.diagnostics.size()) + " frames in " +
               std::to_string(total_ms) + " ms -> " + res_path;
  }
  for (const auto& line : lines) std::cerr << line << "\n";
  return kExitOk;
}

int cmd_estimate(const std::string& train_dir, const std::string& out_path,
                 const std::string& config_path) {
  const RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  ParseWarnings warnings;
  TrainingSet ts;
  ts.sequences = load_sequences(expand_dataset_dir(train_dir), &warnings);
  print_warnings(warnings);

  const FitReport fit = fit_all(ts, cfg.tracker);
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write model file: " + out_path);
  save_fit_report(fit, out);

  std::cerr << "fitted on " << ts.sequences.size() << " sequences: sigma_ca=" << fit.sigma_ca
            << " sigma_sr=" << fit.sigma_sr << " c_ex=" << fit.clutter.c_ex
            << " (pcr targets=" << fit.n_pcr_targets << ", r samples=" << fit.n_r_samples
            << ", tracklets=" << fit.n_tracklets << ")\n";
  return kExitOk;
}

struct EvalRow {
  std::string name;
  MetricsReport rep;
};

std::vector<EvalRow> evaluate_paths(const std::string& gt_path,
                                    const std::string& results_path, double iou_thr) {
  std::vector<EvalRow> rows;
  if (fs::is_directory(results_path)) {
    for (const auto& entry : fs::directory_iterator(results_path)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
      const std::string stem = entry.path().stem().string();
      if (stem.size() > 5 && stem.substr(stem.size() - 5) == "_diag") continue;
      fs::path gt_file = fs::path(gt_path) / stem / "gt" / "gt.txt";
      if (!fs::exists(gt_file)) gt_file = fs::path(gt_path) / (stem + ".txt");
      if (!fs::exists(gt_file)) {
        throw DataError("no ground truth for sequence '" + stem + "' under " + gt_path);
      }
      const auto gt = parse_mot_gt(gt_file.string());
      const auto rep = parse_results(entry.path().string());
      rows.push_back({stem, evaluate(gt, rep, iou_thr)});
    }
    std::sort(rows.begin(), rows.end(),
              [](const EvalRow& a, const EvalRow& b) { return a.name < b.name; });
    if (rows.empty()) throw DataError("no result files under " + results_path);
  } else {
    const auto gt = parse_mot_gt(gt_path);
    const auto rep = parse_results(results_path);
    rows.push_back({fs::path(results_path).stem().string(), evaluate(gt, rep, iou_thr)});
  }
  return rows;
}

MetricsReport combine(const std::vector<EvalRow>& rows) {
  MetricsReport total;
  for (const auto& r : rows) {
    total.fp += r.rep.fp;
    total.fn += r.rep.fn;
    total.idsw += r.rep.idsw;
    total.gt_count += r.rep.gt_count;
    total.matches += r.rep.matches;
    total.idtp += r.rep.idtp;
    total.idfp += r.rep.idfp;
    total.idfn += r.rep.idfn;
  }
  total.mota = total.gt_count > 0
                   ? 1.0 - static_cast<double>(total.fp + total.fn + total.idsw) /
                               static_cast<double>(total.gt_count)
                   : 0.0;
  const double denom = static_cast<double>(2 * total.idtp + total.idfp + total.idfn);
  total.idf1 = denom > 0.0 ? 2.0 * static_cast<double>(total.idtp) / denom : 0.0;
  return total;
}

void print_metrics_table(const std::vector<EvalRow>& rows, const MetricsReport& total,
                         std::ostream& os) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %8s %8s %8s %8s %8s %8s\n", "sequence", "MOTA",
                "IDF1", "FP", "FN", "IDSW", "GT");
  os << buf;
  auto line = [&](const std::string& name, const MetricsReport& r) {
    std::snprintf(buf, sizeof(buf), "%-20s %8.4f %8.4f %8ld %8ld %8ld %8ld\n", name.c_str(),
                  r.mota, r.idf1, r.fp, r.fn, r.idsw, r.gt_count);
    os << buf;
  };
  for (const auto& r : rows) line(r.name, r.rep);
  line("TOTAL", total);
}

void write_metrics_csv(const std::vector<EvalRow>& rows, const MetricsReport& total,
                       std::ostream& os) {
  os << "sequence,mota,idf1,fp,fn,idsw,gt\n";
  auto line = [&](const std::string& name, const MetricsReport& r) {
    os << name << ',' << r.mota << ',' << r.idf1 << ',' << r.fp << ',' << r.fn << ','
       << r.idsw << ',' << r.gt_count << '\n';
  };
  for (const auto& r : rows) line(r.name, r.rep);
  line("TOTAL", total);
}

int cmd_evaluate(const std::string& gt_path, const std::string& results_path, double iou_thr,
                 const std::string& csv_path) {
  const auto rows = evaluate_paths(gt_path, results_path, iou_thr);
  const MetricsReport total = combine(rows);
  print_metrics_table(rows, total, std::cout);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot write csv file: " + csv_path);
    write_metrics_csv(rows, total, out);
  } else {
    write_metrics_csv(rows, total, std::cout);
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::string& name, std::optional<uint64_t> seed) {
  SimConfig cfg = config_path.empty() ? SimConfig{} : load_sim_config(config_path);
  if (seed) cfg.seed = *seed;
  const SimOutput out = simulate(cfg);
  write_sim_sequence(out, out_dir, name);
  size_t n_dets = 0;
  for (const auto& fd : out.frames) n_dets += fd.detections.size();
  std::cerr << "simulated " << cfg.n_frames << " frames, " << out.gt.size() << " gt boxes, "
            << n_dets << " detections -> " << (fs::path(out_dir) / name).string() << "\n";
  return kExitOk;
}

struct AblationRow {
  bool dynamic_clutter;
  bool distance_aware;
  AssocStrategy assoc;
  ConfidenceMode confidence;
};

// The eight-strategy grid, full method last.
const AblationRow kAblationRows[] = {
    {false, true, AssocStrategy::Probabilistic, ConfidenceMode::Off},
    {false, false, AssocStrategy::Probabilistic, ConfidenceMode::Off},
    {true, false, AssocStrategy::Probabilistic, ConfidenceMode::Off},
    {true, false, AssocStrategy::Iou, ConfidenceMode::Off},
    {true, true, AssocStrategy::Iou, ConfidenceMode::Off},
    {true, true, AssocStrategy::Probabilistic, ConfidenceMode::Off},
    {true, true, AssocStrategy::Probabilistic, ConfidenceMode::Raw},
    {true, true, AssocStrategy::Probabilistic, ConfidenceMode::Calibrated},
};

const char* assoc_name(AssocStrategy a) {
  switch (a) {
    case AssocStrategy::Probabilistic: return "probabilistic";
    case AssocStrategy::Iou: return "iou";
    case AssocStrategy::Traditional: return "traditional";
  }
  return "?";
}

const char* conf_name(ConfidenceMode c) {
  switch (c) {
    case ConfidenceMode::Off: return "off";
    case ConfidenceMode::Raw: return "raw";
    case ConfidenceMode::Calibrated: return "calibrated";
  }
  return "?";
}

int cmd_ablate(const std::string& train_dir, const std::string& val_dir,
               const std::string& out_csv, const std::string& config_path) {
  const RunConfig run_cfg =
      config_path.empty() ? RunConfig{} : load_run_config(config_path);

  ParseWarnings warnings;
  TrainingSet train;
  train.sequences = load_sequences(expand_dataset_dir(train_dir), &warnings);
  const std::vector<SequenceData> val =
      load_sequences(expand_dataset_dir(val_dir), &warnings);
  print_warnings(warnings);

  std::cerr << "fitting models on " << train.sequences.size() << " training sequences\n";
  const FitReport fit = fit_all(train, run_cfg.tracker);

  double mean_width = 0.0;
  long n_dets = 0;
  for (const auto& seq : train.sequences) {
    for (const auto& fd : seq.frames) {
      for (const auto& d : fd.detections) {
        mean_width += d.bbox.w;
        ++n_dets;
      }
    }
  }
  if (n_dets > 0) mean_width /= static_cast<double>(n_dets);

  std::ofstream csv(out_csv);
  if (!csv) throw DataError("cannot write csv file: " + out_csv);
  csv << "row,dynamic_clutter,distance_aware,association,confidence,mota,idf1\n";

  for (size_t row = 0; row < 8; ++row) {
    const AblationRow& ab = kAblationRows[row];
    TrackerConfig tc = run_cfg.tracker;
    tc.clutter = ab.dynamic_clutter ? ClutterMode::Dynamic : ClutterMode::Constant;
    tc.motion.distance_aware = ab.distance_aware;
    if (mean_width > 0.0) tc.motion.reference_width = mean_width;
    tc.assoc = ab.assoc;
    tc.confidence = ab.confidence;

    // Sequences are disjoint in frame range and id space for joint scoring.
    std::vector<GroundTruthBox> all_gt;
    std::vector<ReportedBox> all_rep;
    int frame_offset = 0;
    for (size_t s = 0; s < val.size(); ++s) {
      const SequenceData& seq = val[s];
      const TrackerConfig seq_cfg = with_models(tc, fit, seq.framerate);
      const SequenceResult res =
          run_tracker(seq.frames, seq_cfg, &fit.confidence, &fit.clutter);
      const int id_offset = 100000 * static_cast<int>(s);
      int max_frame = 0;
      for (GroundTruthBox g : seq.gt) {
        max_frame = std::max(max_frame, g.frame);
        g.frame += frame_offset;
        g.target_id += id_offset;
        all_gt.push_back(g);
      }
      for (ReportedBox b : res.boxes) {
        max_frame = std::max(max_frame, b.frame);
        b.frame += frame_offset;
        b.track_id += id_offset;
        all_rep.push_back(b);
      }
      frame_offset += max_frame + 1;
    }
    const MetricsReport rep = evaluate(all_gt, all_rep);
    csv << (row + 1) << ',' << (ab.dynamic_clutter ? 1 : 0) << ','
        << (ab.distance_aware ? 1 : 0) << ',' << assoc_name(ab.assoc) << ','
        << conf_name(ab.confidence) << ',' << rep.mota << ',' << rep.idf1 << '\n';
    std::cerr << "row " << (row + 1) << ": MOTA " << rep.mota << " IDF1 " << rep.idf1
              << "\n";
  }
  std::cerr << "ablation grid written to " << out_csv << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"base: probabilistic multi-object tracker"};
  app.require_subcommand(1);

  auto* track = app.add_subcommand("track", "run the tracker on MOT sequences");
  std::string track_config, track_models, track_out;
  std::vector<std::string> track_seqs;
  track->add_option("--config", track_config, "run config file");
  track->add_option("--models", track_models, "fitted model file");
  track->add_option("--seq", track_seqs, "sequence directories")->required();
  track->add_option("--out", track_out, "output directory");

  auto* estimate = app.add_subcommand("estimate", "fit model parameters from training data");
  std::string est_train, est_out, est_config;
  estimate->add_option("--train", est_train, "training dataset directory")->required();
  estimate->add_option("--out", est_out, "output model file")->required();
  estimate->add_option("--config", est_config, "run config file");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score results against ground truth");
  std::string ev_gt, ev_res, ev_csv;
  double ev_iou = 0.5;
  evaluate_cmd->add_option("--gt", ev_gt, "gt file or dataset directory")->required();
  evaluate_cmd->add_option("--results", ev_res, "result file or directory")->required();
  evaluate_cmd->add_option("--iou", ev_iou, "matching IOU threshold");
  evaluate_cmd->add_option("--csv", ev_csv, "write the CSV here instead of stdout");

  auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic MOT sequence");
  std::string sim_config, sim_out, sim_name = "synthetic";
  std::optional<uint64_t> sim_seed;
  simulate_cmd->add_option("--config", sim_config, "simulator config file");
  simulate_cmd->add_option("--out", sim_out, "output dataset directory")->required();
  simulate_cmd->add_option("--name", sim_name, "sequence name");
  simulate_cmd->add_option("--seed", sim_seed, "rng seed");

  auto* ablate = app.add_subcommand("ablate", "run the 8-row strategy grid");
  std::string ab_train, ab_val, ab_out, ab_config;
  ablate->add_option("--train", ab_train, "training dataset directory")->required();
  ablate->add_option("--val", ab_val, "validation dataset directory")->required();
  ablate->add_option("--out", ab_out, "output csv")->required();
  ablate->add_option("--config", ab_config, "run config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;  // --help is not an error
  }

  try {
    if (track->parsed()) return cmd_track(track_config, track_models, track_seqs, track_out);
    if (estimate->parsed()) return cmd_estimate(est_train, est_out, est_config);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev_gt, ev_res, ev_iou, ev_csv);
    if (simulate_cmd->parsed()) return cmd_simulate(sim_config, sim_out, sim_name, sim_seed);
    if (ablate->parsed()) return cmd_ablate(ab_train, ab_val, ab_out, ab_config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
