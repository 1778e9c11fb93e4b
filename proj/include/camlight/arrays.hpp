#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "camlight/errors.hpp"
#include "camlight/flow.hpp"
#include "camlight/image.hpp"

namespace camlight {

enum class DType { float32, uint8 };

std::string_view to_string(DType t);

// Borrowed row-major contiguous buffer.
struct ArrayView {
  const void* data = nullptr;
  DType dtype = DType::float32;
  std::vector<std::size_t> shape;

  std::size_t element_count() const;
};

// Owning float32 array produced by the exporters below.
struct Array {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  ArrayView view() const { return {data.data(), DType::float32, shape}; }
};

// Wrong rank or extent. `dimension` is the axis index (-1 for rank).
class ArrayShapeError : public DimensionError {
 public:
  ArrayShapeError(std::string what, int dimension, std::size_t expected, std::size_t actual);
  int dimension() const noexcept { return dimension_; }
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  int dimension_;
  std::size_t expected_;
  std::size_t actual_;
};

class ArrayDTypeError : public ValidationError {
 public:
  ArrayDTypeError(std::string what, DType expected, DType actual);
  DType expected() const noexcept { return expected_; }
  DType actual() const noexcept { return actual_; }

 private:
  DType expected_;
  DType actual_;
};

// f x h x w x 3 (float32 in [0, 1], or uint8 bytes).
Video video_from_array(const ArrayView& a);
Array video_to_array(const Video& video);
// h x w x 3.
Frame frame_from_array(const ArrayView& a);
Array frame_to_array(const Frame& frame);

// f x h x w float32.
MaskVideo masks_from_array(const ArrayView& a);
Array masks_to_array(const MaskVideo& masks);
std::vector<DepthMap> depths_from_array(const ArrayView& a);
Array depths_to_array(const std::vector<DepthMap>& depths);

// f x 2 x h x w float32; NaN in either channel marks an invalid vector.
std::vector<FlowField> flows_from_array(const ArrayView& a);
Array flows_to_array(const std::vector<FlowField>& flows);

}  // namespace camlight
