#include "camlight/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>
#include <json.hpp>

#include "camlight/io.hpp"
#include "camlight/trajectory.hpp"

namespace camlight {
namespace {

float gain_bias(float c, float gain, float bias) {
  return from_byte(to_byte(std::clamp(gain * c + bias, 0.0f, 1.0f)));
}

CameraPose translation(double x, double y, double z) {
  CameraPose p;
  p.translation = Eigen::Vector3d(x, y, z);
  return p;
}

CameraPose yaw(double degrees) {
  CameraPose p;
  p.rotation = Eigen::AngleAxisd(degrees * M_PI / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
  return p;
}

void write_clip_frames(const fs::path& dir, const Video& frames) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) write_frame(dir / frame_name(i, ".png"), frames[i]);
}

void write_clip_depths(const fs::path& dir, const std::vector<DepthMap>& depths) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < depths.size(); ++i) write_depth_pfm(dir / frame_name(i, ".pfm"), depths[i]);
}

}  // namespace

SceneRender SyntheticScene::render(const CameraPose& world_to_camera, const CameraIntrinsics& k, int frame) const {
  SceneRender out{Frame(k.width, k.height), DepthMap(k.width, k.height, 0.0f)};
  const Eigen::Matrix3d rt = world_to_camera.rotation.transpose();
  const Eigen::Vector3d center = -rt * world_to_camera.translation;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      // Camera-space ray with unit z, so the hit parameter is the camera depth.
      const Eigen::Vector3d dir = rt * Eigen::Vector3d((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      Rgb color;
      if (dir.z() != 0.0) {
        const double s = (background_depth - center.z()) / dir.z();
        if (s > 0.0) {
          best = s;
          color = background;
        }
      }
      for (const Card& c : cards) {
        if (dir.z() == 0.0) continue;
        const double s = (c.depth - center.z()) / dir.z();
        if (!(s > 0.0) || s >= best) continue;
        const Eigen::Vector3d hit = center + s * dir;
        const double ox = c.velocity.x() * frame;
        const double oy = c.velocity.y() * frame;
        if (hit.x() >= c.x0 + ox && hit.x() <= c.x1 + ox && hit.y() >= c.y0 + oy && hit.y() <= c.y1 + oy) {
          best = s;
          color = c.color;
        }
      }
      if (std::isfinite(best)) {
        out.image(u, v) = color;
        out.depth(u, v) = static_cast<float>(best);
      }
    }
  }
  return out;
}

Rgb byte_color(int r, int g, int b) {
  return {from_byte(static_cast<std::uint8_t>(r)), from_byte(static_cast<std::uint8_t>(g)),
          from_byte(static_cast<std::uint8_t>(b))};
}

Frame apply_gain_bias(const Frame& frame, const Rgb& gain, const Rgb& bias) {
  Frame out = frame;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Rgb& p = out[i];
    p = {gain_bias(p.r, gain.r, bias.r), gain_bias(p.g, gain.g, bias.g), gain_bias(p.b, gain.b, bias.b)};
  }
  return out;
}

Video apply_gain_bias(const Video& video, const Rgb& gain, const Rgb& bias) {
  Video out;
  out.reserve(video.size());
  for (const Frame& f : video) out.push_back(apply_gain_bias(f, gain, bias));
  return out;
}

SyntheticScene demo_scene(bool moving) {
  SyntheticScene scene;
  scene.background_depth = 10.0;
  scene.background = byte_color(90, 110, 140);
  Card near;
  near.depth = 4.0;
  near.x0 = -1.2, near.x1 = -0.1, near.y0 = -0.8, near.y1 = 0.6;
  near.color = byte_color(200, 60, 50);
  Card mid;
  mid.depth = 6.0;
  mid.x0 = 0.4, mid.x1 = 2.0, mid.y0 = -1.0, mid.y1 = 0.9;
  mid.color = byte_color(60, 170, 80);
  if (moving) {
    near.velocity = {0.05, 0.0};
    mid.velocity = {-0.03, 0.01};
  }
  scene.cards = {near, mid};
  return scene;
}

void write_demo_dataset(const fs::path& dir, const DemoOptions& options) {
  const int f = options.frames;
  if (f < 1) throw ValidationError("demo needs at least one frame");
  const CameraIntrinsics k = CameraIntrinsics::default_for(options.width, options.height);
  const Rgb gain{1.10f, 0.95f, 0.80f};
  const Rgb bias{0.02f, 0.00f, 0.05f};
  fs::create_directories(dir);
  std::string manifest;

  auto record = [&](const nlohmann::json& r) { manifest += r.dump() + "\n"; };

  {
    // Static scene, camera panning right; the input view repeats frame 0.
    const SyntheticScene scene = demo_scene(false);
    Trajectory cameras;
    for (int i = 0; i < f; ++i) cameras.push_back(translation(-0.04 * i, 0.0, 0.0));
    Video frames;
    std::vector<DepthMap> depths;
    for (int i = 0; i < f; ++i) {
      SceneRender r = scene.render(cameras[static_cast<std::size_t>(i)], k, i);
      frames.push_back(std::move(r.image));
      depths.push_back(std::move(r.depth));
    }
    const int repeat = 0;
    Trajectory to_input;
    for (int i = 0; i < f; ++i) to_input.push_back(cameras[repeat] * cameras[static_cast<std::size_t>(i)].inverse());
    const fs::path clip = dir / "static_pan";
    write_clip_frames(clip / "target", frames);
    write_clip_depths(clip / "depth", depths);
    write_clip_frames(clip / "relit", {apply_gain_bias(frames[repeat], gain, bias)});
    write_text(clip / "trajectory.json", serialize_poses(to_input) + "\n");
    record({{"clip_id", "static_pan"},
            {"class", "static"},
            {"strategy", "frame_repeat"},
            {"target_dir", "static_pan/target"},
            {"depth_dir", "static_pan/depth"},
            {"relit_path", "static_pan/relit"},
            {"trajectory_path", "static_pan/trajectory.json"},
            {"relit_index", f / 2},
            {"repeat_index", repeat},
            {"output_dir", "pairs/static_pan"}});
  }

  {
    // Moving cards, fixed camera; relit first, then moved to a side view.
    const SyntheticScene scene = demo_scene(true);
    Video frames;
    std::vector<DepthMap> depths;
    for (int i = 0; i < f; ++i) {
      SceneRender r = scene.render(CameraPose::identity(), k, i);
      frames.push_back(std::move(r.image));
      depths.push_back(std::move(r.depth));
    }
    Trajectory to_input;
    for (int i = 0; i < f; ++i) to_input.push_back(yaw(1.0) * translation(0.15 + 0.02 * i, 0.0, 0.0));
    const fs::path clip = dir / "dynamic_cards";
    write_clip_frames(clip / "target", frames);
    write_clip_depths(clip / "depth", depths);
    write_clip_frames(clip / "relit", apply_gain_bias(frames, gain, bias));
    write_text(clip / "trajectory.json", serialize_poses(to_input) + "\n");
    record({{"clip_id", "dynamic_cards"},
            {"class", "dynamic"},
            {"strategy", "relight_then_reproject"},
            {"target_dir", "dynamic_cards/target"},
            {"depth_dir", "dynamic_cards/depth"},
            {"relit_path", "dynamic_cards/relit"},
            {"trajectory_path", "dynamic_cards/trajectory.json"},
            {"relit_index", 0},
            {"output_dir", "pairs/dynamic_cards"}});
  }

  {
    // Generated novel-view clip of a moving scene; the original is the input.
    const SyntheticScene scene = demo_scene(true);
    Video frames;
    Video generated;
    std::vector<DepthMap> depths;
    Trajectory to_novel;
    for (int i = 0; i < f; ++i) {
      const CameraPose camera = translation(-0.02 * i, 0.0, 0.0);
      const CameraPose novel = yaw(-0.8) * translation(-0.08, 0.03, 0.0);
      SceneRender r = scene.render(camera, k, i);
      frames.push_back(std::move(r.image));
      depths.push_back(std::move(r.depth));
      generated.push_back(apply_gain_bias(scene.render(novel * camera, k, i).image, gain, bias));
      to_novel.push_back(novel);
    }
    const fs::path clip = dir / "ai_orbit";
    write_clip_frames(clip / "target", frames);
    write_clip_depths(clip / "depth", depths);
    write_clip_frames(clip / "generated", generated);
    write_text(clip / "trajectory.json", serialize_poses(to_novel) + "\n");
    record({{"clip_id", "ai_orbit"},
            {"class", "ai_generated"},
            {"target_dir", "ai_orbit/target"},
            {"depth_dir", "ai_orbit/depth"},
            {"relit_path", "ai_orbit/generated"},
            {"trajectory_path", "ai_orbit/trajectory.json"},
            {"relit_index", 0},
            {"output_dir", "pairs/ai_orbit"}});
  }

  write_text(dir / "manifest.jsonl", manifest);
}

}  // namespace camlight
