#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "camlight/errors.hpp"

namespace camlight {

// Row-major single-channel grid. Indexed as (u, v) = (column, row).
template <typename T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw DimensionError("negative plane size");
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(int u, int v) { return values_[index(u, v)]; }
  const T& operator()(int u, int v) const { return values_[index(u, v)]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  bool contains(int u, int v) const noexcept { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  template <typename U>
  bool same_shape(const Plane<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Plane&) const = default;

 private:
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

// Depth in camera units; entries that are <= 0 or non-finite are invalid.
using DepthMap = Plane<float>;
// Scalar masks in [0, 1]. Binary visibility masks and constant soft masks
// share this type, so consumers must not assume {0, 1}.
using Mask = Plane<float>;
using MaskVideo = std::vector<Mask>;

inline bool is_valid_depth(float d) noexcept { return d > 0.0f && std::isfinite(d); }

struct Rgb {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;

  bool operator==(const Rgb&) const = default;
};

// Color frame with channels in [0, 1]. A blank frame holds no content (all
// zeros) and lifts to an empty point cloud.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, Rgb fill = {}) : pixels_(width, height, fill) {}

  static Frame blank(int width, int height) {
    Frame f(width, height);
    f.blank_ = true;
    return f;
  }

  int width() const noexcept { return pixels_.width(); }
  int height() const noexcept { return pixels_.height(); }
  bool is_blank() const noexcept { return blank_; }
  void set_blank(bool blank) noexcept { blank_ = blank; }

  Rgb& operator()(int u, int v) { return pixels_(u, v); }
  const Rgb& operator()(int u, int v) const { return pixels_(u, v); }
  Rgb& operator[](std::size_t i) { return pixels_[i]; }
  const Rgb& operator[](std::size_t i) const { return pixels_[i]; }
  std::size_t size() const noexcept { return pixels_.size(); }

  Plane<Rgb>& pixels() noexcept { return pixels_; }
  const Plane<Rgb>& pixels() const noexcept { return pixels_; }

  template <typename U>
  bool same_shape(const Plane<U>& other) const noexcept {
    return pixels_.same_shape(other);
  }
  bool same_shape(const Frame& other) const noexcept { return pixels_.same_shape(other.pixels_); }

  bool operator==(const Frame&) const = default;

 private:
  Plane<Rgb> pixels_;
  bool blank_ = false;
};

using Video = std::vector<Frame>;

// Snaps every channel to the nearest k/255. Identity on frames read from
// 8-bit files.
Frame quantize8(const Frame& frame);
Video quantize8(const Video& video);
Mask quantize8(const Mask& mask);

inline std::uint8_t to_byte(float value) noexcept {
  const float clamped = value < 0.0f ? 0.0f : (value > 1.0f ? 1.0f : value);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}
inline float from_byte(std::uint8_t byte) noexcept { return static_cast<float>(byte) / 255.0f; }

// Throws DimensionError naming `what` unless the two shapes agree.
void require_same_shape(int width_a, int height_a, int width_b, int height_b, const std::string& what);

}  // namespace camlight
