#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Geometry>

#include "camlight/camera.hpp"

namespace camlight {

using Trajectory = std::vector<CameraPose>;

inline constexpr int kDefaultFrameCount = 49;

enum class PresetKind { orbit, pan, zoom, dolly };

std::string_view to_string(PresetKind kind);
PresetKind preset_from_string(std::string_view name);

// Preset parameters by name (see preset_parameter_names). Missing entries
// take the preset defaults at expansion time.
struct PresetSpec {
  PresetKind kind = PresetKind::pan;
  std::map<std::string, double> params;
  int frames = kDefaultFrameCount;

  bool operator==(const PresetSpec&) const = default;
};

struct Keyframe {
  int frame = 0;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // (w, x, y, z), world-to-camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  bool operator==(const Keyframe& o) const {
    return frame == o.frame && rotation.coeffs() == o.rotation.coeffs() && translation == o.translation;
  }
};

struct KeyframeSpec {
  std::vector<Keyframe> keyframes;

  bool operator==(const KeyframeSpec&) const = default;
};

using TrajectorySpec = std::variant<PresetSpec, KeyframeSpec>;

// Accepted parameter names and their defaults for a preset.
const std::map<std::string, double>& preset_defaults(PresetKind kind);

// Parses a trajectory document:
//   {"preset": "orbit"|"pan"|"zoom"|"dolly", <params>..., "frames": n}
//   {"keyframes": [{"frame": i, "q": [w, x, y, z], "t": [x, y, z]}, ...]}
// Syntax errors carry line:column, field errors a JSON pointer.
TrajectorySpec parse_trajectory(std::string_view text);
std::string serialize_trajectory(const TrajectorySpec& spec);

// Frame count a spec asks for when the caller has no override. Keyframe
// specs cover through their last keyframe.
int natural_frame_count(const TrajectorySpec& spec);

// Presets start at the identity pose. Keyframe specs slerp rotations and lerp
// translations between bracketing keyframes and hold the last pose after the
// final keyframe.
Trajectory expand(const TrajectorySpec& spec, int frames);

// Keyframe document with one entry per pose; parse + expand reproduces the
// trajectory up to quaternion round-off.
std::string serialize_poses(const Trajectory& trajectory);

// Shortest-arc spherical interpolation; s = 0 and s = 1 return the endpoints
// unchanged.
Eigen::Quaterniond slerp(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double s);

struct PoseResidual {
  int frame = 0;
  double orthonormality = 0.0;
  double determinant = 0.0;
  bool passed = true;
};

struct TrajectoryReport {
  std::vector<PoseResidual> frames;
  double tolerance = 1e-6;
  bool passed = true;

  std::vector<int> failing_frames() const;
};

TrajectoryReport validate(const Trajectory& trajectory, double tolerance = 1e-6);

}  // namespace camlight
