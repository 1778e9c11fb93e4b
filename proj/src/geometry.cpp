#include "camlight/geometry.hpp"

#include <cmath>
#include <limits>

#include "camlight/parallel.hpp"

namespace camlight {
namespace {

void check_inputs(int width, int height, const CameraIntrinsics& k) {
  k.validate();
  require_same_shape(width, height, k.width, k.height, "backproject: input vs intrinsics");
}

template <typename ColorOf>
PointCloud lift(const DepthMap& depth, const CameraIntrinsics& k, ColorOf&& color_of) {
  PointCloud cloud;
  std::size_t valid = 0;
  for (float d : depth.values()) valid += is_valid_depth(d) ? 1 : 0;
  cloud.points.reserve(valid);
  std::uint32_t index = 0;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const float d = depth(u, v);
      if (!is_valid_depth(d)) continue;
      const double z = d;
      CloudPoint p;
      p.position = {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
      p.color = color_of(u, v);
      p.u = u;
      p.v = v;
      p.source_index = index++;
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

struct Cell {
  double z = std::numeric_limits<double>::infinity();
  std::uint32_t source = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t slot = 0;

  bool beats(const Cell& other) const noexcept {
    return z < other.z || (z == other.z && source < other.source);
  }
};

// Splats cloud[begin, end) into `cells`.
void splat_range(const PointCloud& cloud, std::size_t begin, std::size_t end, const CameraPose& pose,
                 const CameraIntrinsics& k, const RenderOptions& options, std::vector<Cell>& cells) {
  const int w = k.width;
  const int h = k.height;
  const int r = options.splat_radius;
  constexpr double kLimit = 1e9;
  for (std::size_t i = begin; i < end; ++i) {
    const CloudPoint& point = cloud.points[i];
    const Eigen::Vector3d q = pose.rotation * point.position + pose.translation;
    if (!(q.z() > options.z_min)) continue;
    const double pu = std::round(k.fx * q.x() / q.z() + k.cx);
    const double pv = std::round(k.fy * q.y() / q.z() + k.cy);
    if (!(std::abs(pu) < kLimit) || !(std::abs(pv) < kLimit)) continue;
    const long long cu = static_cast<long long>(pu);
    const long long cv = static_cast<long long>(pv);
    if (cu + r < 0 || cv + r < 0 || cu - r >= w || cv - r >= h) continue;
    const Cell candidate{q.z(), point.source_index, static_cast<std::uint32_t>(i)};
    const int u0 = static_cast<int>(std::max<long long>(0, cu - r));
    const int u1 = static_cast<int>(std::min<long long>(w - 1, cu + r));
    const int v0 = static_cast<int>(std::max<long long>(0, cv - r));
    const int v1 = static_cast<int>(std::min<long long>(h - 1, cv + r));
    for (int v = v0; v <= v1; ++v) {
      Cell* row = cells.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(w);
      for (int u = u0; u <= u1; ++u) {
        if (candidate.beats(row[u])) row[u] = candidate;
      }
    }
  }
}

}  // namespace

PointCloud backproject(const Frame& frame, const DepthMap& depth, const CameraIntrinsics& k) {
  check_inputs(frame.width(), frame.height(), k);
  require_same_shape(frame.width(), frame.height(), depth.width(), depth.height(), "backproject: frame vs depth");
  if (frame.is_blank()) return {};
  return lift(depth, k, [&](int u, int v) { return frame(u, v); });
}

PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& k) {
  check_inputs(depth.width(), depth.height(), k);
  return lift(depth, k, [](int, int) { return Rgb{}; });
}

RenderedView project(const PointCloud& cloud, const CameraPose& pose, const CameraIntrinsics& k,
                     const RenderOptions& options) {
  k.validate();
  if (options.splat_radius < 0) throw ValidationError("splat radius must be >= 0");
  const std::size_t pixels = static_cast<std::size_t>(k.width) * static_cast<std::size_t>(k.height);

  // Each worker fills a private buffer over a contiguous slice of points; the
  // (z, source_index) minimum is order independent, so merging the buffers in
  // any order gives the single-threaded result.
  const std::size_t n = cloud.size();
  const int workers = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(resolve_workers(options.workers)), std::max<std::size_t>(1, n / 4096)));
  std::vector<std::vector<Cell>> buffers(static_cast<std::size_t>(workers), std::vector<Cell>(pixels));
  const std::size_t chunk = (n + workers - 1) / std::max(workers, 1);
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    splat_range(cloud, begin, end, pose, k, options, buffers[w]);
  });
  std::vector<Cell>& cells = buffers.front();
  for (std::size_t w = 1; w < buffers.size(); ++w) {
    for (std::size_t i = 0; i < pixels; ++i) {
      if (buffers[w][i].beats(cells[i])) cells[i] = buffers[w][i];
    }
  }

  RenderedView view{Frame(k.width, k.height), Mask(k.width, k.height, 0.0f),
                    Plane<double>(k.width, k.height, std::numeric_limits<double>::infinity())};
  for (std::size_t i = 0; i < pixels; ++i) {
    const Cell& c = cells[i];
    if (!std::isfinite(c.z)) continue;
    view.image[i] = cloud.points[c.slot].color;
    view.mask[i] = 1.0f;
    view.depth_buffer[i] = c.z;
  }
  return view;
}

RenderedView splat_footprint(const PointCloud& cloud, const CameraPose& pose, const CameraIntrinsics& k, int radius,
                             int workers) {
  RenderOptions options;
  options.splat_radius = radius;
  options.workers = workers;
  return project(cloud, pose, k, options);
}

}  // namespace camlight
