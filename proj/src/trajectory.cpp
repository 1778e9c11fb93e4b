#include "camlight/trajectory.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "camlight/errors.hpp"

namespace camlight {
namespace {

using nlohmann::json;

constexpr double kUnitTolerance = 1e-6;

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ":" + std::to_string(column);
}

double number_at(const json& node, const std::string& where) {
  if (!node.is_number()) throw ParseError("expected a number", where);
  const double value = node.get<double>();
  if (!std::isfinite(value)) throw ParseError("expected a finite number", where);
  return value;
}

int integer_at(const json& node, const std::string& where) {
  if (!node.is_number_integer()) throw ParseError("expected an integer", where);
  return node.get<int>();
}

PresetSpec parse_preset(const json& doc) {
  PresetSpec spec;
  const json& name = doc.at("preset");
  if (!name.is_string()) throw ParseError("expected a preset name", "/preset");
  try {
    spec.kind = preset_from_string(name.get<std::string>());
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), "/preset");
  }
  const auto& defaults = preset_defaults(spec.kind);
  for (const auto& [key, value] : doc.items()) {
    if (key == "preset") continue;
    if (key == "frames") {
      spec.frames = integer_at(value, "/frames");
      if (spec.frames < 1) throw ParseError("frames must be >= 1", "/frames");
      continue;
    }
    if (!defaults.contains(key)) {
      throw ParseError("unknown parameter for preset " + std::string(to_string(spec.kind)), "/" + key);
    }
    spec.params[key] = number_at(value, "/" + key);
  }
  return spec;
}

Eigen::Vector3d vector3_at(const json& node, const std::string& where) {
  if (!node.is_array() || node.size() != 3) throw ParseError("expected an array of 3 numbers", where);
  return {number_at(node[0], where + "/0"), number_at(node[1], where + "/1"), number_at(node[2], where + "/2")};
}

KeyframeSpec parse_keyframes(const json& doc) {
  const json& list = doc.at("keyframes");
  if (!list.is_array()) throw ParseError("expected an array", "/keyframes");
  if (list.empty()) throw ParseError("empty keyframes", "/keyframes");
  for (const auto& [key, value] : doc.items()) {
    if (key != "keyframes") throw ParseError("unknown field", "/" + key);
  }
  KeyframeSpec spec;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string base = "/keyframes/" + std::to_string(i);
    const json& entry = list[i];
    if (!entry.is_object()) throw ParseError("expected an object", base);
    for (const char* field : {"frame", "q", "t"}) {
      if (!entry.contains(field)) throw ParseError(std::string("missing field \"") + field + "\"", base);
    }
    for (const auto& [key, value] : entry.items()) {
      if (key != "frame" && key != "q" && key != "t") throw ParseError("unknown field", base + "/" + key);
    }
    Keyframe kf;
    kf.frame = integer_at(entry["frame"], base + "/frame");
    const json& q = entry["q"];
    if (!q.is_array() || q.size() != 4) throw ParseError("expected [w, x, y, z]", base + "/q");
    const double w = number_at(q[0], base + "/q/0");
    const double x = number_at(q[1], base + "/q/1");
    const double y = number_at(q[2], base + "/q/2");
    const double z = number_at(q[3], base + "/q/3");
    kf.rotation = Eigen::Quaterniond(w, x, y, z);
    if (std::abs(kf.rotation.norm() - 1.0) > kUnitTolerance) {
      throw ParseError("quaternion is not unit-norm (|q| = " + std::to_string(kf.rotation.norm()) + ")", base + "/q");
    }
    kf.translation = vector3_at(entry["t"], base + "/t");
    if (i == 0 && kf.frame != 0) throw ParseError("first keyframe must be frame 0", base + "/frame");
    if (i > 0 && kf.frame <= spec.keyframes.back().frame) {
      throw ParseError("keyframe indices must be strictly increasing", base + "/frame");
    }
    spec.keyframes.push_back(kf);
  }
  return spec;
}

Eigen::Matrix3d yaw(double radians) {
  return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

// Pose of a camera whose center is `center` and whose camera-to-world
// rotation is `orientation`.
CameraPose looking(const Eigen::Matrix3d& orientation, const Eigen::Vector3d& center) {
  CameraPose pose;
  pose.rotation = orientation.transpose();
  pose.translation = -(pose.rotation * center);
  return pose;
}

double param(const PresetSpec& spec, const std::string& name) {
  const auto it = spec.params.find(name);
  return it != spec.params.end() ? it->second : preset_defaults(spec.kind).at(name);
}

Trajectory expand_preset(const PresetSpec& spec, int frames) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  Trajectory out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i) {
    const double s = frames > 1 ? static_cast<double>(i) / (frames - 1) : 0.0;
    switch (spec.kind) {
      case PresetKind::pan: {
        out.push_back(looking(Eigen::Matrix3d::Identity(),
                              {param(spec, "dx") * s, param(spec, "dy") * s, 0.0}));
        break;
      }
      case PresetKind::zoom: {
        out.push_back(looking(Eigen::Matrix3d::Identity(), {0.0, 0.0, param(spec, "dz") * s}));
        break;
      }
      case PresetKind::dolly: {
        out.push_back(looking(yaw(param(spec, "yaw_deg") * kDeg * s), {0.0, 0.0, param(spec, "dz") * s}));
        break;
      }
      case PresetKind::orbit: {
        // Arc about the pivot (0, 0, radius), a stand-in for the scene centroid.
        const double radius = param(spec, "radius");
        const Eigen::Matrix3d turn = yaw(param(spec, "angle_deg") * kDeg * s);
        const Eigen::Vector3d pivot(0.0, 0.0, radius);
        out.push_back(looking(turn, pivot + turn * Eigen::Vector3d(0.0, 0.0, -radius)));
        break;
      }
    }
    if (i == 0) out.back() = CameraPose::identity();
  }
  return out;
}

Trajectory expand_keyframes(const KeyframeSpec& spec, int frames) {
  const int last = spec.keyframes.back().frame;
  if (last > frames - 1) {
    throw ValidationError("keyframe index " + std::to_string(last) + " out of range for " + std::to_string(frames) +
                          " frames");
  }
  Trajectory out;
  out.reserve(static_cast<std::size_t>(frames));
  std::size_t seg = 0;
  for (int i = 0; i < frames; ++i) {
    while (seg + 1 < spec.keyframes.size() && spec.keyframes[seg + 1].frame <= i) ++seg;
    const Keyframe& a = spec.keyframes[seg];
    if (seg + 1 == spec.keyframes.size() || i == a.frame) {
      out.push_back(CameraPose::from_quaternion(a.rotation, a.translation));
      continue;
    }
    const Keyframe& b = spec.keyframes[seg + 1];
    const double s = static_cast<double>(i - a.frame) / (b.frame - a.frame);
    out.push_back(CameraPose::from_quaternion(slerp(a.rotation, b.rotation, s),
                                              (1.0 - s) * a.translation + s * b.translation));
  }
  return out;
}

}  // namespace

std::string_view to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::orbit: return "orbit";
    case PresetKind::pan: return "pan";
    case PresetKind::zoom: return "zoom";
    case PresetKind::dolly: return "dolly";
  }
  return "pan";
}

PresetKind preset_from_string(std::string_view name) {
  if (name == "orbit") return PresetKind::orbit;
  if (name == "pan") return PresetKind::pan;
  if (name == "zoom") return PresetKind::zoom;
  if (name == "dolly") return PresetKind::dolly;
  throw ValidationError("unknown preset \"" + std::string(name) + "\" (expected orbit, pan, zoom or dolly)");
}

const std::map<std::string, double>& preset_defaults(PresetKind kind) {
  static const std::map<std::string, double> orbit{{"angle_deg", 20.0}, {"radius", 4.0}};
  static const std::map<std::string, double> pan{{"dx", 0.25}, {"dy", 0.0}};
  static const std::map<std::string, double> zoom{{"dz", 0.5}};
  static const std::map<std::string, double> dolly{{"dz", 0.5}, {"yaw_deg", 5.0}};
  switch (kind) {
    case PresetKind::orbit: return orbit;
    case PresetKind::pan: return pan;
    case PresetKind::zoom: return zoom;
    case PresetKind::dolly: return dolly;
  }
  return pan;
}

TrajectorySpec parse_trajectory(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string message = e.what();
    if (const auto pos = message.find("syntax error"); pos != std::string::npos) message = message.substr(pos);
    throw ParseError(message, line_column(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw ParseError("expected a JSON object", "/");
  const bool has_preset = doc.contains("preset");
  const bool has_keys = doc.contains("keyframes");
  if (has_preset == has_keys) throw ParseError("document needs exactly one of \"preset\" or \"keyframes\"", "/");
  if (has_preset) return parse_preset(doc);
  return parse_keyframes(doc);
}

std::string serialize_trajectory(const TrajectorySpec& spec) {
  json doc;
  if (const auto* preset = std::get_if<PresetSpec>(&spec)) {
    doc["preset"] = std::string(to_string(preset->kind));
    for (const auto& [key, value] : preset->params) doc[key] = value;
    doc["frames"] = preset->frames;
  } else {
    json list = json::array();
    for (const Keyframe& kf : std::get<KeyframeSpec>(spec).keyframes) {
      const auto& q = kf.rotation;
      list.push_back({{"frame", kf.frame},
                      {"q", {q.w(), q.x(), q.y(), q.z()}},
                      {"t", {kf.translation.x(), kf.translation.y(), kf.translation.z()}}});
    }
    doc["keyframes"] = std::move(list);
  }
  return doc.dump(2);
}

int natural_frame_count(const TrajectorySpec& spec) {
  if (const auto* preset = std::get_if<PresetSpec>(&spec)) return preset->frames;
  return std::get<KeyframeSpec>(spec).keyframes.back().frame + 1;
}

Trajectory expand(const TrajectorySpec& spec, int frames) {
  if (frames < 1) throw ValidationError("frame count must be >= 1");
  if (const auto* preset = std::get_if<PresetSpec>(&spec)) return expand_preset(*preset, frames);
  const auto& keys = std::get<KeyframeSpec>(spec);
  if (keys.keyframes.empty()) throw ValidationError("empty keyframes");
  return expand_keyframes(keys, frames);
}

std::string serialize_poses(const Trajectory& trajectory) {
  KeyframeSpec spec;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    Keyframe kf;
    kf.frame = static_cast<int>(i);
    kf.rotation = Eigen::Quaterniond(trajectory[i].rotation).normalized();
    kf.translation = trajectory[i].translation;
    spec.keyframes.push_back(kf);
  }
  return serialize_trajectory(spec);
}

Eigen::Quaterniond slerp(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double s) {
  if (s <= 0.0) return a;
  if (s >= 1.0) return b;
  Eigen::Vector4d qa = a.coeffs();
  Eigen::Vector4d qb = b.coeffs();
  double dot = qa.dot(qb);
  if (dot < 0.0) {
    qb = -qb;
    dot = -dot;
  }
  Eigen::Vector4d out;
  if (dot > 1.0 - 1e-12) {
    out = (1.0 - s) * qa + s * qb;
  } else {
    const double theta = std::acos(std::min(dot, 1.0));
    const double sin_theta = std::sin(theta);
    out = (std::sin((1.0 - s) * theta) / sin_theta) * qa + (std::sin(s * theta) / sin_theta) * qb;
  }
  out.normalize();
  Eigen::Quaterniond q;
  q.coeffs() = out;
  return q;
}

std::vector<int> TrajectoryReport::failing_frames() const {
  std::vector<int> out;
  for (const PoseResidual& r : frames) {
    if (!r.passed) out.push_back(r.frame);
  }
  return out;
}

TrajectoryReport validate(const Trajectory& trajectory, double tolerance) {
  TrajectoryReport report;
  report.tolerance = tolerance;
  report.passed = !trajectory.empty();
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    PoseResidual r;
    r.frame = static_cast<int>(i);
    r.orthonormality = trajectory[i].orthonormality_residual();
    r.determinant = trajectory[i].determinant_deviation();
    const bool finite = trajectory[i].rotation.allFinite() && trajectory[i].translation.allFinite();
    r.passed = finite && r.orthonormality <= tolerance && r.determinant <= tolerance;
    report.passed = report.passed && r.passed;
    report.frames.push_back(r);
  }
  return report;
}

}  // namespace camlight
