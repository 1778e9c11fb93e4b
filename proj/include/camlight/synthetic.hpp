#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "camlight/camera.hpp"
#include "camlight/image.hpp"

namespace camlight {

// Axis-aligned rectangle in the world plane z = depth, moving by `velocity`
// (world x, y) per frame.
struct Card {
  double depth = 4.0;
  double x0 = -0.5, x1 = 0.5;
  double y0 = -0.5, y1 = 0.5;
  Rgb color;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

struct SceneRender {
  Frame image;
  DepthMap depth;
};

// Flat-colored cards in front of an unbounded background plane. Every
// surface has one color, so the only color edges are depth edges.
struct SyntheticScene {
  double background_depth = 10.0;
  Rgb background;
  std::vector<Card> cards;

  SceneRender render(const CameraPose& world_to_camera, const CameraIntrinsics& k, int frame = 0) const;
};

// Nearest-byte colors, so scenes survive 8-bit storage unchanged.
Rgb byte_color(int r, int g, int b);

// Per-channel out = clamp(gain * in + bias), rounded to 8 bits. Stands in for
// an external relighting model in demos and tests.
Frame apply_gain_bias(const Frame& frame, const Rgb& gain, const Rgb& bias);
Video apply_gain_bias(const Video& video, const Rgb& gain, const Rgb& bias);

SyntheticScene demo_scene(bool moving);

struct DemoOptions {
  int width = 96;
  int height = 64;
  int frames = 8;
};

// Writes three clips (static, dynamic, ai_generated) with depths, external
// relit inputs, trajectories and a manifest.jsonl into `dir`.
void write_demo_dataset(const std::filesystem::path& dir, const DemoOptions& options = {});

}  // namespace camlight
