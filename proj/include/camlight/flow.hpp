#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "camlight/camera.hpp"
#include "camlight/geometry.hpp"
#include "camlight/image.hpp"

namespace camlight {

// Per-pixel displacement (du, dv): pixel x corresponds to x + flow(x).
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height) : du(width, height, 0.0f), dv(width, height, 0.0f), valid(width, height, 0) {}

  int width() const noexcept { return du.width(); }
  int height() const noexcept { return du.height(); }
  bool is_valid(int u, int v) const { return valid(u, v) != 0; }
  bool is_valid(std::size_t i) const { return valid[i] != 0; }

  void set(int u, int v, float x, float y) {
    du(u, v) = x;
    dv(u, v) = y;
    valid(u, v) = 1;
  }

  Plane<float> du;
  Plane<float> dv;
  Plane<std::uint8_t> valid;

  bool operator==(const FlowField&) const = default;
};

// Bilinear footprint of a sample position. Positions must lie in
// [0, w-1] x [0, h-1]; a corner whose weight is zero never counts as part of
// the footprint, so sampling exactly on the last row/column is allowed.
struct Footprint {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  double wx = 0.0;
  double wy = 0.0;

  // Calls fn(u, v, weight) for each corner with nonzero weight.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const double w00 = (1.0 - wx) * (1.0 - wy);
    const double w10 = wx * (1.0 - wy);
    const double w01 = (1.0 - wx) * wy;
    const double w11 = wx * wy;
    if (w00 != 0.0) fn(x0, y0, w00);
    if (w10 != 0.0) fn(x1, y0, w10);
    if (w01 != 0.0) fn(x0, y1, w01);
    if (w11 != 0.0) fn(x1, y1, w11);
  }
};

std::optional<Footprint> bilinear_footprint(double px, double py, int width, int height);

// Bilinear flow sample; nullopt when the footprint leaves the image or
// touches an invalid flow vector.
std::optional<Eigen::Vector2d> sample_flow(const FlowField& flow, double px, double py);

// Correspondence flow of `depth`'s view into the camera `pose` away:
// lift, transform, project; flow = x' - x. Pixels with invalid depth or
// transformed z <= z_min are invalid.
FlowField derive_flow(const DepthMap& depth, const CameraPose& pose, const CameraIntrinsics& k, double z_min = 1e-6);

struct WarpResult {
  Frame image;
  Mask mask;
};

// out(x) = bilinear(image, x + flow(x)). Output is masked to 0 (and zeroed)
// where the flow is invalid, the footprint leaves the image, or the footprint
// touches a pixel whose `source_valid` is 0.
WarpResult backward_warp(const Frame& image, const FlowField& flow, const Mask* source_valid = nullptr);

// Mask half of backward_warp without touching colors.
Mask warp_mask(const FlowField& flow, const Mask* source_valid = nullptr);

// 1 where |fwd(x) + bwd(x + fwd(x))| <= tau, 0 where it exceeds tau or either
// flow is unavailable.
Mask fb_consistency(const FlowField& forward, const FlowField& backward, double tau);

// Visibility by depth test: x (with depth_a) is carried into view b by
// `a_to_b`; every footprint corner there must carry a valid depth within
// relative_tolerance of the transported z.
Mask depth_consistency(const DepthMap& depth_a, const CameraPose& a_to_b, const CameraIntrinsics& k,
                       const DepthMap& depth_b, double relative_tolerance, double z_min = 1e-6);

// Z-buffered render of a depth map's own geometry into the camera `pose`
// away; empty pixels are 0 (invalid).
DepthMap render_depth(const DepthMap& depth, const CameraPose& pose, const CameraIntrinsics& k,
                      const RenderOptions& options = {});

// Elementwise product of binary masks; both must share a shape.
Mask mask_and(const Mask& a, const Mask& b);

// Copy of `result` with mask and image zeroed wherever `gate` is 0.
WarpResult gated(WarpResult result, const Mask& gate);

}  // namespace camlight
