#include "camlight/image.hpp"

namespace camlight {

Frame quantize8(const Frame& frame) {
  Frame out = frame;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Rgb& c = out[i];
    c = {from_byte(to_byte(c.r)), from_byte(to_byte(c.g)), from_byte(to_byte(c.b))};
  }
  return out;
}

Video quantize8(const Video& video) {
  Video out;
  out.reserve(video.size());
  for (const Frame& f : video) out.push_back(quantize8(f));
  return out;
}

Mask quantize8(const Mask& mask) {
  Mask out = mask;
  for (float& m : out.values()) m = from_byte(to_byte(m));
  return out;
}

void require_same_shape(int width_a, int height_a, int width_b, int height_b, const std::string& what) {
  if (width_a != width_b || height_a != height_b) {
    throw DimensionError(what + ": resolution mismatch (" + std::to_string(width_a) + "x" + std::to_string(height_a) +
                         " vs " + std::to_string(width_b) + "x" + std::to_string(height_b) + ")");
  }
}

}  // namespace camlight
