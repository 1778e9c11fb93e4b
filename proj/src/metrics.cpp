#include "camlight/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "camlight/parallel.hpp"

namespace camlight {
namespace {

void require_same_frame(const Frame& a, const Frame& b) {
  require_same_shape(a.width(), a.height(), b.width(), b.height(), "metric inputs");
}

void require_same_video(const Video& a, const Video& b) {
  if (a.size() != b.size()) {
    throw DimensionError("metric inputs: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                         " frames");
  }
  if (a.empty()) throw ValidationError("metric inputs: empty video");
  for (std::size_t i = 0; i < a.size(); ++i) require_same_frame(a[i], b[i]);
}

double squared_error(const Frame& a, const Frame& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dr = static_cast<double>(a[i].r) - b[i].r;
    const double dg = static_cast<double>(a[i].g) - b[i].g;
    const double db = static_cast<double>(a[i].b) - b[i].b;
    sum += dr * dr + dg * dg + db * db;
  }
  return sum;
}

double psnr_from(double sse, double count) {
  const double mse = sse / count;
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(1.0 / mse);
}

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> taps{};
  const int half = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double x = i - half;
    taps[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * kSsimSigma * kSsimSigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Valid-region separable Gaussian filter: output is (w - 10) x (h - 10).
Plane<double> filter_valid(const Plane<double>& in, const std::array<double, kSsimWindow>& taps) {
  const int ow = in.width() - kSsimWindow + 1;
  const int oh = in.height() - kSsimWindow + 1;
  Plane<double> rows(ow, in.height());
  for (int v = 0; v < in.height(); ++v) {
    for (int u = 0; u < ow; ++u) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[static_cast<std::size_t>(k)] * in(u + k, v);
      rows(u, v) = s;
    }
  }
  Plane<double> out(ow, oh);
  for (int v = 0; v < oh; ++v) {
    for (int u = 0; u < ow; ++u) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[static_cast<std::size_t>(k)] * rows(u, v + k);
      out(u, v) = s;
    }
  }
  return out;
}

Plane<double> product(const Plane<double>& a, const Plane<double>& b) {
  Plane<double> out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

// Implicit kd-tree: the subrange [lo, hi) splits at mid = (lo + hi) / 2 on
// axis depth % 3, left half <= split, right half >= split.
class KdTree {
 public:
  explicit KdTree(const Points& points) : points_(points), order_(points.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    build(0, order_.size(), 0);
  }

  double nearest_squared(const Eigen::Vector3d& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(q, 0, order_.size(), 0, best);
    return best;
  }

 private:
  void build(std::size_t lo, std::size_t hi, int depth) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const int axis = depth % 3;
    const auto at = [&](std::size_t i) { return order_.begin() + static_cast<std::ptrdiff_t>(i); };
    std::nth_element(at(lo), at(mid), at(hi),
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search(const Eigen::Vector3d& q, std::size_t lo, std::size_t hi, int depth, double& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const Eigen::Vector3d& p = points_[order_[mid]];
    best = std::min(best, squared_distance(q, p));
    if (hi - lo == 1) return;
    const int axis = depth % 3;
    const double diff = q[axis] - p[axis];
    const bool left_first = diff < 0.0;
    if (left_first) {
      search(q, lo, mid, depth + 1, best);
      if (diff * diff <= best) search(q, mid + 1, hi, depth + 1, best);
    } else {
      search(q, mid + 1, hi, depth + 1, best);
      if (diff * diff <= best) search(q, lo, mid, depth + 1, best);
    }
  }

 public:
  static double squared_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
  }

 private:
  const Points& points_;
  std::vector<std::size_t> order_;
};

double mean_distance(const std::vector<double>& squared) {
  double sum = 0.0;
  for (double s : squared) sum += std::sqrt(s);
  return sum / static_cast<double>(squared.size());
}

std::string format_value(const std::optional<double>& v, int precision) {
  if (!v) return "-";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

nlohmann::json video_json(const VideoMetrics& m) {
  nlohmann::json node;
  node["name"] = m.name;
  node["psnr"] = m.psnr ? json_number(*m.psnr) : nlohmann::json();
  node["ssim"] = m.ssim ? json_number(*m.ssim) : nlohmann::json();
  node["motion_preservation"] = m.motion_preservation ? json_number(*m.motion_preservation) : nlohmann::json();
  if (!m.chamfer_per_frame.empty()) {
    const ChamferStats s = chamfer_stats(m.chamfer_per_frame);
    node["chamfer"] = {{"mean", s.mean}, {"median", s.median}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
  } else {
    node["chamfer"] = nullptr;
  }
  for (const auto& [key, value] : m.external) node["external"][key] = json_number(value);
  return node;
}

}  // namespace

double psnr(const Frame& a, const Frame& b) {
  require_same_frame(a, b);
  if (a.size() == 0) throw ValidationError("psnr: empty frame");
  return psnr_from(squared_error(a, b), 3.0 * static_cast<double>(a.size()));
}

double psnr(const Video& a, const Video& b) {
  require_same_video(a, b);
  double sse = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sse += squared_error(a[i], b[i]);
    count += 3.0 * static_cast<double>(a[i].size());
  }
  if (count == 0.0) throw ValidationError("psnr: empty frames");
  return psnr_from(sse, count);
}

Plane<double> luminance(const Frame& frame) {
  Plane<double> gray(frame.width(), frame.height());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const Rgb& p = frame[i];
    gray[i] = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
  }
  return gray;
}

double ssim(const Frame& a, const Frame& b) {
  require_same_frame(a, b);
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw ValidationError("ssim: image " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " is smaller than the 11x11 window");
  }
  static const auto taps = gaussian_taps();
  const Plane<double> x = luminance(a);
  const Plane<double> y = luminance(b);
  const Plane<double> mx = filter_valid(x, taps);
  const Plane<double> my = filter_valid(y, taps);
  const Plane<double> sxx = filter_valid(product(x, x), taps);
  const Plane<double> syy = filter_valid(product(y, y), taps);
  const Plane<double> sxy = filter_valid(product(x, y), taps);
  const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
  const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
           ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return sum / static_cast<double>(mx.size());
}

double ssim(const Video& a, const Video& b) {
  require_same_video(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += ssim(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

double motion_preservation(const std::vector<FlowField>& predicted, const std::vector<FlowField>& reference) {
  if (predicted.size() != reference.size()) {
    throw DimensionError("motion_preservation: " + std::to_string(predicted.size()) + " vs " +
                         std::to_string(reference.size()) + " flow fields");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < predicted.size(); ++f) {
    const FlowField& p = predicted[f];
    const FlowField& r = reference[f];
    require_same_shape(p.width(), p.height(), r.width(), r.height(), "motion_preservation flows");
    for (std::size_t i = 0; i < p.du.size(); ++i) {
      if (!p.is_valid(i) || !r.is_valid(i)) continue;
      const double du = static_cast<double>(p.du[i]) - r.du[i];
      const double dv = static_cast<double>(p.dv[i]) - r.dv[i];
      sum += std::sqrt(du * du + dv * dv);
      ++count;
    }
  }
  if (count == 0) throw ValidationError("motion_preservation: no jointly valid pixels");
  return sum / static_cast<double>(count);
}

Points positions(const PointCloud& cloud) {
  Points out;
  out.reserve(cloud.size());
  for (const CloudPoint& p : cloud.points) out.push_back(p.position);
  return out;
}

std::vector<double> nearest_squared(const Points& queries, const Points& reference, NearestBackend backend,
                                    int workers) {
  if (reference.empty()) throw ValidationError("nearest neighbor: empty reference cloud");
  std::vector<double> out(queries.size());
  if (backend == NearestBackend::brute_force) {
    parallel_for(queries.size(), workers, [&](std::size_t i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Eigen::Vector3d& r : reference) best = std::min(best, KdTree::squared_distance(queries[i], r));
      out[i] = best;
    });
  } else {
    const KdTree tree(reference);
    parallel_for(queries.size(), workers, [&](std::size_t i) { out[i] = tree.nearest_squared(queries[i]); });
  }
  return out;
}

ChamferResult chamfer(const Points& a, const Points& b, NearestBackend backend, int workers) {
  if (a.empty() || b.empty()) throw ValidationError("chamfer: empty cloud");
  ChamferResult r;
  r.a_to_b = mean_distance(nearest_squared(a, b, backend, workers));
  r.b_to_a = mean_distance(nearest_squared(b, a, backend, workers));
  r.symmetric = 0.5 * (r.a_to_b + r.b_to_a);
  return r;
}

ChamferResult chamfer(const PointCloud& a, const PointCloud& b, NearestBackend backend, int workers) {
  return chamfer(positions(a), positions(b), backend, workers);
}

ChamferStats chamfer_stats(std::span<const double> values) {
  if (values.empty()) throw ValidationError("chamfer_stats: empty list");
  ChamferStats s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

VideoMetrics MetricReport::aggregate() const {
  VideoMetrics agg;
  agg.name = "mean";
  auto mean_of = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const VideoMetrics& v : videos) {
      if (const std::optional<double>& x = v.*member) {
        sum += *x;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  agg.psnr = mean_of(&VideoMetrics::psnr);
  agg.ssim = mean_of(&VideoMetrics::ssim);
  agg.motion_preservation = mean_of(&VideoMetrics::motion_preservation);
  for (const VideoMetrics& v : videos) {
    agg.chamfer_per_frame.insert(agg.chamfer_per_frame.end(), v.chamfer_per_frame.begin(), v.chamfer_per_frame.end());
  }
  std::map<std::string, std::pair<double, int>> ext;
  for (const VideoMetrics& v : videos) {
    for (const auto& [key, value] : v.external) {
      ext[key].first += value;
      ext[key].second += 1;
    }
  }
  for (const auto& [key, acc] : ext) agg.external[key] = acc.first / acc.second;
  return agg;
}

std::optional<ChamferStats> MetricReport::chamfer() const {
  const VideoMetrics agg = aggregate();
  if (agg.chamfer_per_frame.empty()) return std::nullopt;
  return chamfer_stats(agg.chamfer_per_frame);
}

std::string MetricReport::to_json() const {
  nlohmann::json doc;
  doc["videos"] = nlohmann::json::array();
  for (const VideoMetrics& v : videos) doc["videos"].push_back(video_json(v));
  doc["aggregate"] = video_json(aggregate());
  return doc.dump(2);
}

std::string MetricReport::to_table() const {
  std::vector<std::string> header{"video", "PSNR", "SSIM", "MotionErr", "CD mean", "CD median", "CD std", "CD min",
                                  "CD max"};
  std::set<std::string> ext_keys;
  for (const VideoMetrics& v : videos) {
    for (const auto& kv : v.external) ext_keys.insert(kv.first);
  }
  header.insert(header.end(), ext_keys.begin(), ext_keys.end());

  auto row_for = [&](const VideoMetrics& v) {
    std::vector<std::string> row{v.name, format_value(v.psnr, 2), format_value(v.ssim, 4),
                                 format_value(v.motion_preservation, 3)};
    if (v.chamfer_per_frame.empty()) {
      row.insert(row.end(), 5, "-");
    } else {
      const ChamferStats s = chamfer_stats(v.chamfer_per_frame);
      for (double x : {s.mean, s.median, s.std, s.min, s.max}) row.push_back(format_value(x, 4));
    }
    for (const std::string& k : ext_keys) {
      auto it = v.external.find(k);
      row.push_back(it == v.external.end() ? "-" : format_value(it->second, 4));
    }
    return row;
  };

  std::vector<std::vector<std::string>> rows{header};
  for (const VideoMetrics& v : videos) rows.push_back(row_for(v));
  if (!videos.empty()) rows.push_back(row_for(aggregate()));

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace camlight
