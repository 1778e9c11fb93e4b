#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "camlight/camera.hpp"
#include "camlight/image.hpp"

namespace camlight {

struct CloudPoint {
  Eigen::Vector3d position;
  Rgb color;
  int u = 0;
  int v = 0;
  // Strictly increasing along the cloud; breaks depth ties when rendering.
  std::uint32_t source_index = 0;
};

struct PointCloud {
  std::vector<CloudPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

struct RenderedView {
  Frame image;
  Mask mask;                   // 1 where some point landed, else 0
  Plane<double> depth_buffer;  // winning camera-space z, +inf where empty
};

struct RenderOptions {
  int splat_radius = 0;  // Chebyshev footprint radius in pixels
  int workers = 1;       // 0 = hardware concurrency
  double z_min = 1e-6;   // points with z <= z_min are culled
};

// Lifts every valid-depth pixel to camera space in row-major order:
// ((u - cx) d / fx, (v - cy) d / fy, d). Blank frames lift to nothing.
PointCloud backproject(const Frame& frame, const DepthMap& depth, const CameraIntrinsics& k);

// Geometry-only lift; colors are zero.
PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& k);

// Nearest-depth point splatting. Each point is moved into the target camera,
// culled at z_min, and written to round(fx x/z + cx), round(fy y/z + cy)
// (plus the footprint). Per pixel the smallest z wins, equal z resolves to
// the smaller source_index, so the output does not depend on `workers`.
RenderedView project(const PointCloud& cloud, const CameraPose& pose, const CameraIntrinsics& k,
                     const RenderOptions& options = {});

RenderedView splat_footprint(const PointCloud& cloud, const CameraPose& pose, const CameraIntrinsics& k,
                             int radius, int workers = 1);

}  // namespace camlight
