#include "camlight/arrays.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace camlight {
namespace {

void require_rank(const ArrayView& a, std::size_t rank, const char* what) {
  if (!a.data && a.element_count() != 0) throw ValidationError(std::string(what) + ": null buffer");
  if (a.shape.size() != rank) {
    throw ArrayShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                              std::to_string(a.shape.size()),
                          -1, rank, a.shape.size());
  }
}

void require_extent(const ArrayView& a, int dim, std::size_t expected, const char* what) {
  const std::size_t actual = a.shape[static_cast<std::size_t>(dim)];
  if (actual != expected) {
    throw ArrayShapeError(std::string(what) + ": dimension " + std::to_string(dim) + " must be " +
                              std::to_string(expected) + ", got " + std::to_string(actual),
                          dim, expected, actual);
  }
}

void require_dtype(const ArrayView& a, DType expected, const char* what) {
  if (a.dtype != expected) {
    throw ArrayDTypeError(std::string(what) + ": expected dtype " + std::string(to_string(expected)) + ", got " +
                              std::string(to_string(a.dtype)),
                          expected, a.dtype);
  }
}

int to_int(std::size_t v, int dim, const char* what) {
  if (v > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw ArrayShapeError(std::string(what) + ": dimension too large", dim, std::numeric_limits<int>::max(), v);
  }
  return static_cast<int>(v);
}

float channel(const ArrayView& a, std::size_t i) {
  if (a.dtype == DType::uint8) return from_byte(static_cast<const std::uint8_t*>(a.data)[i]);
  return static_cast<const float*>(a.data)[i];
}

Frame frame_at(const ArrayView& a, std::size_t offset, int w, int h) {
  Frame frame(w, h);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const std::size_t base = offset + 3 * i;
    frame[i] = {channel(a, base), channel(a, base + 1), channel(a, base + 2)};
  }
  return frame;
}

std::vector<Plane<float>> planes_from(const ArrayView& a, const char* what) {
  require_rank(a, 3, what);
  require_dtype(a, DType::float32, what);
  const int h = to_int(a.shape[1], 1, what);
  const int w = to_int(a.shape[2], 2, what);
  const auto* src = static_cast<const float*>(a.data);
  std::vector<Plane<float>> out;
  out.reserve(a.shape[0]);
  const std::size_t plane = a.shape[1] * a.shape[2];
  for (std::size_t f = 0; f < a.shape[0]; ++f) {
    Plane<float> p(w, h);
    std::copy(src + f * plane, src + (f + 1) * plane, p.values().begin());
    out.push_back(std::move(p));
  }
  return out;
}

Array planes_to(const std::vector<Plane<float>>& planes) {
  Array out;
  const std::size_t h = planes.empty() ? 0 : static_cast<std::size_t>(planes.front().height());
  const std::size_t w = planes.empty() ? 0 : static_cast<std::size_t>(planes.front().width());
  out.shape = {planes.size(), h, w};
  out.data.reserve(planes.size() * h * w);
  for (const Plane<float>& p : planes) {
    require_same_shape(p.width(), p.height(), static_cast<int>(w), static_cast<int>(h), "array export");
    out.data.insert(out.data.end(), p.values().begin(), p.values().end());
  }
  return out;
}

void append_frame(Array& out, const Frame& frame) {
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out.data.push_back(frame[i].r);
    out.data.push_back(frame[i].g);
    out.data.push_back(frame[i].b);
  }
}

}  // namespace

std::string_view to_string(DType t) { return t == DType::uint8 ? "uint8" : "float32"; }

std::size_t ArrayView::element_count() const {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

ArrayShapeError::ArrayShapeError(std::string what, int dimension, std::size_t expected, std::size_t actual)
    : DimensionError(what), dimension_(dimension), expected_(expected), actual_(actual) {}

ArrayDTypeError::ArrayDTypeError(std::string what, DType expected, DType actual)
    : ValidationError(what), expected_(expected), actual_(actual) {}

Video video_from_array(const ArrayView& a) {
  const char* what = "video array (f x h x w x 3)";
  require_rank(a, 4, what);
  require_extent(a, 3, 3, what);
  const int h = to_int(a.shape[1], 1, what);
  const int w = to_int(a.shape[2], 2, what);
  Video out;
  out.reserve(a.shape[0]);
  const std::size_t stride = a.shape[1] * a.shape[2] * 3;
  for (std::size_t f = 0; f < a.shape[0]; ++f) out.push_back(frame_at(a, f * stride, w, h));
  return out;
}

Array video_to_array(const Video& video) {
  Array out;
  const std::size_t h = video.empty() ? 0 : static_cast<std::size_t>(video.front().height());
  const std::size_t w = video.empty() ? 0 : static_cast<std::size_t>(video.front().width());
  out.shape = {video.size(), h, w, 3};
  out.data.reserve(video.size() * h * w * 3);
  for (const Frame& f : video) {
    require_same_shape(f.width(), f.height(), static_cast<int>(w), static_cast<int>(h), "array export");
    append_frame(out, f);
  }
  return out;
}

Frame frame_from_array(const ArrayView& a) {
  const char* what = "frame array (h x w x 3)";
  require_rank(a, 3, what);
  require_extent(a, 2, 3, what);
  return frame_at(a, 0, to_int(a.shape[1], 1, what), to_int(a.shape[0], 0, what));
}

Array frame_to_array(const Frame& frame) {
  Array out;
  out.shape = {static_cast<std::size_t>(frame.height()), static_cast<std::size_t>(frame.width()), 3};
  out.data.reserve(frame.size() * 3);
  append_frame(out, frame);
  return out;
}

MaskVideo masks_from_array(const ArrayView& a) { return planes_from(a, "mask array (f x h x w)"); }
Array masks_to_array(const MaskVideo& masks) { return planes_to(masks); }
std::vector<DepthMap> depths_from_array(const ArrayView& a) { return planes_from(a, "depth array (f x h x w)"); }
Array depths_to_array(const std::vector<DepthMap>& depths) { return planes_to(depths); }

std::vector<FlowField> flows_from_array(const ArrayView& a) {
  const char* what = "flow array (f x 2 x h x w)";
  require_rank(a, 4, what);
  require_dtype(a, DType::float32, what);
  require_extent(a, 1, 2, what);
  const int h = to_int(a.shape[2], 2, what);
  const int w = to_int(a.shape[3], 3, what);
  const auto* src = static_cast<const float*>(a.data);
  const std::size_t plane = a.shape[2] * a.shape[3];
  std::vector<FlowField> out;
  out.reserve(a.shape[0]);
  for (std::size_t f = 0; f < a.shape[0]; ++f) {
    FlowField flow(w, h);
    const float* du = src + f * 2 * plane;
    const float* dv = du + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      if (std::isfinite(du[i]) && std::isfinite(dv[i])) {
        flow.du[i] = du[i];
        flow.dv[i] = dv[i];
        flow.valid[i] = 1;
      }
    }
    out.push_back(std::move(flow));
  }
  return out;
}

Array flows_to_array(const std::vector<FlowField>& flows) {
  Array out;
  const std::size_t h = flows.empty() ? 0 : static_cast<std::size_t>(flows.front().height());
  const std::size_t w = flows.empty() ? 0 : static_cast<std::size_t>(flows.front().width());
  out.shape = {flows.size(), 2, h, w};
  out.data.reserve(flows.size() * 2 * h * w);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  for (const FlowField& flow : flows) {
    require_same_shape(flow.width(), flow.height(), static_cast<int>(w), static_cast<int>(h), "array export");
    for (std::size_t i = 0; i < flow.du.size(); ++i) out.data.push_back(flow.is_valid(i) ? flow.du[i] : nan);
    for (std::size_t i = 0; i < flow.dv.size(); ++i) out.data.push_back(flow.is_valid(i) ? flow.dv[i] : nan);
  }
  return out;
}

}  // namespace camlight
