#include "camlight/flow.hpp"

#include <cmath>

namespace camlight {
namespace {

void require_flow_shape(const FlowField& flow, int width, int height, const char* what) {
  require_same_shape(flow.width(), flow.height(), width, height, what);
}

}  // namespace

std::optional<Footprint> bilinear_footprint(double px, double py, int width, int height) {
  if (!(px >= 0.0) || !(py >= 0.0) || !(px <= width - 1) || !(py <= height - 1)) return std::nullopt;
  Footprint fp;
  fp.x0 = static_cast<int>(std::floor(px));
  fp.y0 = static_cast<int>(std::floor(py));
  fp.wx = px - fp.x0;
  fp.wy = py - fp.y0;
  fp.x1 = fp.wx > 0.0 ? fp.x0 + 1 : fp.x0;
  fp.y1 = fp.wy > 0.0 ? fp.y0 + 1 : fp.y0;
  return fp;
}

std::optional<Eigen::Vector2d> sample_flow(const FlowField& flow, double px, double py) {
  const auto fp = bilinear_footprint(px, py, flow.width(), flow.height());
  if (!fp) return std::nullopt;
  bool ok = true;
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  fp->for_each([&](int u, int v, double w) {
    if (!flow.is_valid(u, v)) {
      ok = false;
      return;
    }
    acc.x() += w * flow.du(u, v);
    acc.y() += w * flow.dv(u, v);
  });
  if (!ok) return std::nullopt;
  return acc;
}

FlowField derive_flow(const DepthMap& depth, const CameraPose& pose, const CameraIntrinsics& k, double z_min) {
  k.validate();
  require_same_shape(depth.width(), depth.height(), k.width, k.height, "derive_flow: depth vs intrinsics");
  FlowField flow(depth.width(), depth.height());
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const float d = depth(u, v);
      if (!is_valid_depth(d)) continue;
      const double z = d;
      const Eigen::Vector3d p((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
      const Eigen::Vector3d q = pose.rotation * p + pose.translation;
      if (!(q.z() > z_min)) continue;
      const double pu = k.fx * q.x() / q.z() + k.cx;
      const double pv = k.fy * q.y() / q.z() + k.cy;
      const double fu = pu - u;
      const double fv = pv - v;
      if (!std::isfinite(fu) || !std::isfinite(fv)) continue;
      flow.set(u, v, static_cast<float>(fu), static_cast<float>(fv));
    }
  }
  return flow;
}

Mask warp_mask(const FlowField& flow, const Mask* source_valid) {
  if (source_valid) {
    require_same_shape(source_valid->width(), source_valid->height(), flow.width(), flow.height(),
                       "warp: source mask vs flow");
  }
  Mask mask(flow.width(), flow.height(), 0.0f);
  for (int v = 0; v < flow.height(); ++v) {
    for (int u = 0; u < flow.width(); ++u) {
      if (!flow.is_valid(u, v)) continue;
      const auto fp = bilinear_footprint(u + static_cast<double>(flow.du(u, v)),
                                         v + static_cast<double>(flow.dv(u, v)), flow.width(), flow.height());
      if (!fp) continue;
      bool ok = true;
      if (source_valid) {
        fp->for_each([&](int cu, int cv, double) { ok = ok && (*source_valid)(cu, cv) != 0.0f; });
      }
      if (ok) mask(u, v) = 1.0f;
    }
  }
  return mask;
}

WarpResult backward_warp(const Frame& image, const FlowField& flow, const Mask* source_valid) {
  require_flow_shape(flow, image.width(), image.height(), "backward_warp: image vs flow");
  WarpResult out{Frame(image.width(), image.height()), warp_mask(flow, source_valid)};
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      if (out.mask(u, v) == 0.0f) continue;
      const auto fp = bilinear_footprint(u + static_cast<double>(flow.du(u, v)),
                                         v + static_cast<double>(flow.dv(u, v)), image.width(), image.height());
      double r = 0.0;
      double g = 0.0;
      double b = 0.0;
      fp->for_each([&](int cu, int cv, double w) {
        const Rgb& c = image(cu, cv);
        r += w * c.r;
        g += w * c.g;
        b += w * c.b;
      });
      out.image(u, v) = {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
    }
  }
  return out;
}

Mask fb_consistency(const FlowField& forward, const FlowField& backward, double tau) {
  require_same_shape(forward.width(), forward.height(), backward.width(), backward.height(),
                     "fb_consistency: forward vs backward flow");
  Mask mask(forward.width(), forward.height(), 0.0f);
  for (int v = 0; v < forward.height(); ++v) {
    for (int u = 0; u < forward.width(); ++u) {
      if (!forward.is_valid(u, v)) continue;
      const double fu = forward.du(u, v);
      const double fv = forward.dv(u, v);
      const auto back = sample_flow(backward, u + fu, v + fv);
      if (!back) continue;
      const double ru = fu + back->x();
      const double rv = fv + back->y();
      if (std::sqrt(ru * ru + rv * rv) <= tau) mask(u, v) = 1.0f;
    }
  }
  return mask;
}

Mask depth_consistency(const DepthMap& depth_a, const CameraPose& a_to_b, const CameraIntrinsics& k,
                       const DepthMap& depth_b, double relative_tolerance, double z_min) {
  k.validate();
  require_same_shape(depth_a.width(), depth_a.height(), k.width, k.height, "depth_consistency: depth vs intrinsics");
  require_same_shape(depth_b.width(), depth_b.height(), k.width, k.height, "depth_consistency: depth vs intrinsics");
  Mask mask(depth_a.width(), depth_a.height(), 0.0f);
  for (int v = 0; v < depth_a.height(); ++v) {
    for (int u = 0; u < depth_a.width(); ++u) {
      const float d = depth_a(u, v);
      if (!is_valid_depth(d)) continue;
      const double z = d;
      const Eigen::Vector3d q =
          a_to_b.rotation * Eigen::Vector3d((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z) + a_to_b.translation;
      if (!(q.z() > z_min)) continue;
      const auto fp =
          bilinear_footprint(k.fx * q.x() / q.z() + k.cx, k.fy * q.y() / q.z() + k.cy, k.width, k.height);
      if (!fp) continue;
      bool ok = true;
      const double limit = relative_tolerance * q.z();
      fp->for_each([&](int cu, int cv, double) {
        const float db = depth_b(cu, cv);
        ok = ok && is_valid_depth(db) && std::abs(db - q.z()) <= limit;
      });
      if (ok) mask(u, v) = 1.0f;
    }
  }
  return mask;
}

DepthMap render_depth(const DepthMap& depth, const CameraPose& pose, const CameraIntrinsics& k,
                      const RenderOptions& options) {
  const RenderedView view = project(backproject(depth, k), pose, k, options);
  DepthMap out(k.width, k.height, 0.0f);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double z = view.depth_buffer[i];
    if (std::isfinite(z)) out[i] = static_cast<float>(z);
  }
  return out;
}

Mask mask_and(const Mask& a, const Mask& b) {
  require_same_shape(a.width(), a.height(), b.width(), b.height(), "mask_and");
  Mask out(a.width(), a.height(), 0.0f);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a[i] != 0.0f && b[i] != 0.0f) ? 1.0f : 0.0f;
  return out;
}

WarpResult gated(WarpResult result, const Mask& gate) {
  require_same_shape(result.mask.width(), result.mask.height(), gate.width(), gate.height(), "gate");
  for (std::size_t i = 0; i < result.mask.size(); ++i) {
    if (gate[i] == 0.0f || result.mask[i] == 0.0f) {
      result.mask[i] = 0.0f;
      result.image[i] = Rgb{};
    }
  }
  return result;
}

}  // namespace camlight
