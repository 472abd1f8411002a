#include "base/detector_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace base {

namespace {

// Bin index with clamping of out-of-range values to the edge bins.
int bin_of(const std::vector<double>& edges, double v) {
  const int n = static_cast<int>(edges.size()) - 1;
  if (v <= edges.front()) return 0;
  if (v >= edges.back()) return n - 1;
  const int i = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) -
                                 edges.begin()) -
                1;
  return std::clamp(i, 0, n - 1);
}

std::vector<double> log_spaced_edges(double lo, double hi, int n_bins) {
  if (hi <= lo) hi = lo * 1.001 + 1.0;
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  std::vector<double> edges(n_bins + 1);
  for (int i = 0; i <= n_bins; ++i) {
    edges[i] = std::exp(llo + (lhi - llo) * i / n_bins);
  }
  edges.front() = lo;
  edges.back() = hi;
  return edges;
}

std::pair<double, double> width_range(const std::vector<Detection>& dets) {
  double lo = 1e30, hi = 0.0;
  for (const auto& d : dets) {
    lo = std::min(lo, d.bbox.w);
    hi = std::max(hi, d.bbox.w);
  }
  lo = std::max(lo, 1.0);
  hi = std::max(hi, lo);
  return {lo, hi};
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
  os.precision(17);
  for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  os << '\n';
}

std::vector<double> read_doubles(const std::string& line) {
  std::istringstream ss(line);
  std::vector<double> out;
  double x;
  while (ss >> x) out.push_back(x);
  return out;
}

std::string expect_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error(std::string("model file truncated, expected ") + what);
  }
  return line;
}

std::string strip_key(const std::string& line, const std::string& key) {
  if (line.rfind(key, 0) != 0) {
    throw std::runtime_error("model file: expected '" + key + "' line, got '" + line + "'");
  }
  return line.substr(key.size());
}

}  // namespace

ConfidenceModel fit_confidence(const std::vector<Detection>& inliers,
                               const std::vector<Detection>& all, int n_conf_bins,
                               int n_width_bins, double floor) {
  if (all.empty()) throw std::runtime_error("fit_confidence: no detections");

  ConfidenceModel m;
  m.floor = floor;
  m.conf_edges.resize(n_conf_bins + 1);
  for (int i = 0; i <= n_conf_bins; ++i) {
    m.conf_edges[i] = static_cast<double>(i) / n_conf_bins;
  }
  const auto [wlo, whi] = width_range(all);
  m.width_edges = log_spaced_edges(wlo, whi, n_width_bins);

  std::vector<long> hist_all(static_cast<size_t>(n_conf_bins) * n_width_bins, 0);
  std::vector<long> hist_inlier(hist_all.size(), 0);
  for (const auto& d : all) {
    ++hist_all[static_cast<size_t>(bin_of(m.conf_edges, d.confidence)) * n_width_bins +
               bin_of(m.width_edges, d.bbox.w)];
  }
  for (const auto& d : inliers) {
    ++hist_inlier[static_cast<size_t>(bin_of(m.conf_edges, d.confidence)) * n_width_bins +
                  bin_of(m.width_edges, d.bbox.w)];
  }

  m.ratio.assign(hist_all.size(), -1.0);
  for (size_t i = 0; i < hist_all.size(); ++i) {
    if (hist_all[i] > 0) {
      m.ratio[i] = static_cast<double>(hist_inlier[i]) / static_cast<double>(hist_all[i]);
    }
  }

  // Empty cells inherit from the nearest occupied bin along the confidence
  // axis; columns with no data at all fall back to the nearest occupied
  // width column.
  for (int wi = 0; wi < n_width_bins; ++wi) {
    for (int ci = 0; ci < n_conf_bins; ++ci) {
      if (m.ratio[static_cast<size_t>(ci) * n_width_bins + wi] >= 0.0) continue;
      for (int d = 1; d < n_conf_bins; ++d) {
        const int lo = ci - d, hi = ci + d;
        if (lo >= 0 && m.ratio[static_cast<size_t>(lo) * n_width_bins + wi] >= 0.0) {
          m.ratio[static_cast<size_t>(ci) * n_width_bins + wi] =
              m.ratio[static_cast<size_t>(lo) * n_width_bins + wi];
          break;
        }
        if (hi < n_conf_bins && m.ratio[static_cast<size_t>(hi) * n_width_bins + wi] >= 0.0) {
          m.ratio[static_cast<size_t>(ci) * n_width_bins + wi] =
              m.ratio[static_cast<size_t>(hi) * n_width_bins + wi];
          break;
        }
      }
    }
  }
  for (int ci = 0; ci < n_conf_bins; ++ci) {
    for (int wi = 0; wi < n_width_bins; ++wi) {
      if (m.ratio[static_cast<size_t>(ci) * n_width_bins + wi] >= 0.0) continue;
      for (int d = 1; d < n_width_bins; ++d) {
        const int lo = wi - d, hi = wi + d;
        if (lo >= 0 && m.ratio[static_cast<size_t>(ci) * n_width_bins + lo] >= 0.0) {
          m.ratio[static_cast<size_t>(ci) * n_width_bins + wi] =
              m.ratio[static_cast<size_t>(ci) * n_width_bins + lo];
          break;
        }
        if (hi < n_width_bins && m.ratio[static_cast<size_t>(ci) * n_width_bins + hi] >= 0.0) {
          m.ratio[static_cast<size_t>(ci) * n_width_bins + wi] =
              m.ratio[static_cast<size_t>(ci) * n_width_bins + hi];
          break;
        }
      }
    }
  }

  for (auto& r : m.ratio) r = std::clamp(r < 0.0 ? floor : r, floor, 1.0);
  return m;
}

double conf_likelihood(const ConfidenceModel& m, double confidence, double width) {
  const int ci = bin_of(m.conf_edges, confidence);
  const int wi = bin_of(m.width_edges, width);
  return m.ratio[static_cast<size_t>(ci) * m.n_width_bins() + wi];
}

ClutterModel fit_width_density(const std::vector<Detection>& all, int n_frames,
                               int n_width_bins) {
  if (all.empty()) throw std::runtime_error("fit_width_density: no detections");
  if (n_frames < 1) throw std::runtime_error("fit_width_density: n_frames must be >= 1");

  ClutterModel m;
  const auto [wlo, whi] = width_range(all);
  m.width_edges = log_spaced_edges(wlo, whi, n_width_bins);
  m.density.assign(n_width_bins, 0.0);
  for (const auto& d : all) {
    m.density[bin_of(m.width_edges, d.bbox.w)] += 1.0;
  }
  for (int i = 0; i < n_width_bins; ++i) {
    const double bin_w = m.width_edges[i + 1] - m.width_edges[i];
    m.density[i] /= static_cast<double>(n_frames) * bin_w;
  }
  return m;
}

double lambda_ex(const ClutterModel& m, const Detection& z) {
  return m.c_ex * m.density[bin_of(m.width_edges, z.bbox.w)];
}

double constant_lambda(const ClutterModel& m) {
  if (m.density.empty()) return 0.0;
  double sum = 0.0;
  for (double d : m.density) sum += d;
  return m.c_ex * sum / static_cast<double>(m.density.size());
}

void save_confidence_model(const ConfidenceModel& m, std::ostream& os) {
  os << "basemodel v1 confidence\n";
  os << "floor: ";
  os.precision(17);
  os << m.floor << '\n';
  os << "edges: c ";
  write_doubles(os, m.conf_edges);
  os << "edges: w ";
  write_doubles(os, m.width_edges);
  for (int ci = 0; ci < m.n_conf_bins(); ++ci) {
    std::vector<double> row(m.ratio.begin() + static_cast<size_t>(ci) * m.n_width_bins(),
                            m.ratio.begin() + static_cast<size_t>(ci + 1) * m.n_width_bins());
    write_doubles(os, row);
  }
}

ConfidenceModel load_confidence_model(std::istream& is) {
  if (expect_line(is, "header") != "basemodel v1 confidence") {
    throw std::runtime_error("model file: bad confidence header");
  }
  ConfidenceModel m;
  m.floor = read_doubles(strip_key(expect_line(is, "floor"), "floor: ")).at(0);
  m.conf_edges = read_doubles(strip_key(expect_line(is, "conf edges"), "edges: c "));
  m.width_edges = read_doubles(strip_key(expect_line(is, "width edges"), "edges: w "));
  for (int ci = 0; ci < m.n_conf_bins(); ++ci) {
    const auto row = read_doubles(expect_line(is, "ratio row"));
    if (row.size() != static_cast<size_t>(m.n_width_bins())) {
      throw std::runtime_error("model file: ratio row length mismatch");
    }
    m.ratio.insert(m.ratio.end(), row.begin(), row.end());
  }
  return m;
}

void save_clutter_model(const ClutterModel& m, std::ostream& os) {
  os << "basemodel v1 clutter\n";
  os << "cex: ";
  os.precision(17);
  os << m.c_ex << '\n';
  os << "edges: w ";
  write_doubles(os, m.width_edges);
  for (double d : m.density) {
    os.precision(17);
    os << d << '\n';
  }
}

ClutterModel load_clutter_model(std::istream& is) {
  if (expect_line(is, "header") != "basemodel v1 clutter") {
    throw std::runtime_error("model file: bad clutter header");
  }
  ClutterModel m;
  m.c_ex = read_doubles(strip_key(expect_line(is, "cex"), "cex: ")).at(0);
  m.width_edges = read_doubles(strip_key(expect_line(is, "width edges"), "edges: w "));
  const int n = static_cast<int>(m.width_edges.size()) - 1;
  for (int i = 0; i < n; ++i) {
    m.density.push_back(read_doubles(expect_line(is, "density row")).at(0));
  }
  return m;
}

}  // namespace base
