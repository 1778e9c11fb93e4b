#include "camlight/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "camlight/io.hpp"

namespace camlight {
namespace {

using nlohmann::json;

void reject_unknown(const json& node, const std::set<std::string>& allowed, const std::string& pointer) {
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key)) throw ParseError("unknown field \"" + key + "\"", pointer + "/" + key);
  }
}

template <typename T>
T field(const json& node, const char* key, const std::string& pointer) {
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("wrong type", pointer + "/" + key);
  }
}

}  // namespace

std::string_view to_string(NoiseScale scale) { return scale == NoiseScale::variance ? "variance" : "std"; }

NoiseScale noise_scale_from_string(std::string_view name) {
  if (name == "std") return NoiseScale::standard_deviation;
  if (name == "variance") return NoiseScale::variance;
  throw ValidationError("unknown noise scale \"" + std::string(name) + "\" (expected std or variance)");
}

CameraIntrinsics PipelineConfig::intrinsics() const { return intrinsics_for(width, height); }

CameraIntrinsics PipelineConfig::intrinsics_for(int frame_width, int frame_height) const {
  CameraIntrinsics k = CameraIntrinsics::default_for(frame_width, frame_height);
  if (fx) k.fx = *fx;
  if (fy) k.fy = *fy;
  if (cx) k.cx = *cx;
  if (cy) k.cy = *cy;
  return k;
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ValidationError("config: " + message);
  };
  require(width >= 1 && height >= 1, "width and height must be >= 1");
  require(frame_count >= 1, "frame_count must be >= 1");
  require(!fx || (*fx > 0.0 && std::isfinite(*fx)), "fx must be > 0");
  require(!fy || (*fy > 0.0 && std::isfinite(*fy)), "fy must be > 0");
  require(!cx || std::isfinite(*cx), "cx must be finite");
  require(!cy || std::isfinite(*cy), "cy must be finite");
  require(!alpha || (*alpha >= 0.0f && *alpha <= 1.0f), "alpha must lie in [0, 1]");
  require(tau >= 0.0 && std::isfinite(tau), "tau must be >= 0");
  require(depth_tolerance >= 0.0 && std::isfinite(depth_tolerance), "depth_tolerance must be >= 0");
  require(splat_radius >= 0, "splat_radius must be >= 0");
  require(noise_rate >= 0.0 && std::isfinite(noise_rate), "noise rate must be >= 0");
  require(motion_threshold >= 0.0 && std::isfinite(motion_threshold), "motion_threshold must be >= 0");
  require(workers >= 0, "workers must be >= 0");
  require(trajectory_path.empty() || trajectory_inline.empty(), "give trajectory or trajectory_spec, not both");
}

PipelineConfig parse_config(std::string_view text, PipelineConfig c) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object", "");
  reject_unknown(doc,
                 {"width", "height", "frame_count", "intrinsics", "trajectory", "trajectory_spec", "modality", "alpha",
                  "propagation", "tau", "depth_tolerance", "splat_radius", "noise", "motion_threshold", "workers"},
                 "");
  if (doc.contains("width")) c.width = field<int>(doc, "width", "");
  if (doc.contains("height")) c.height = field<int>(doc, "height", "");
  if (doc.contains("frame_count")) c.frame_count = field<int>(doc, "frame_count", "");
  if (doc.contains("intrinsics")) {
    const json& k = doc["intrinsics"];
    reject_unknown(k, {"fx", "fy", "cx", "cy"}, "/intrinsics");
    if (k.contains("fx")) c.fx = field<double>(k, "fx", "/intrinsics");
    if (k.contains("fy")) c.fy = field<double>(k, "fy", "/intrinsics");
    if (k.contains("cx")) c.cx = field<double>(k, "cx", "/intrinsics");
    if (k.contains("cy")) c.cy = field<double>(k, "cy", "/intrinsics");
  }
  if (doc.contains("trajectory")) c.trajectory_path = field<std::string>(doc, "trajectory", "");
  if (doc.contains("trajectory_spec")) c.trajectory_inline = doc["trajectory_spec"].dump();
  if (doc.contains("modality")) c.modality = modality_from_string(field<std::string>(doc, "modality", ""));
  if (doc.contains("alpha")) c.alpha = field<float>(doc, "alpha", "");
  if (doc.contains("propagation")) c.propagation = propagation_from_string(field<std::string>(doc, "propagation", ""));
  if (doc.contains("tau")) c.tau = field<double>(doc, "tau", "");
  if (doc.contains("depth_tolerance")) c.depth_tolerance = field<double>(doc, "depth_tolerance", "");
  if (doc.contains("splat_radius")) c.splat_radius = field<int>(doc, "splat_radius", "");
  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    reject_unknown(n, {"rate", "seed", "scale"}, "/noise");
    if (n.contains("rate")) c.noise_rate = field<double>(n, "rate", "/noise");
    if (n.contains("seed")) c.noise_seed = field<std::uint64_t>(n, "seed", "/noise");
    if (n.contains("scale")) c.noise_scale = noise_scale_from_string(field<std::string>(n, "scale", "/noise"));
  }
  if (doc.contains("motion_threshold")) c.motion_threshold = field<double>(doc, "motion_threshold", "");
  if (doc.contains("workers")) c.workers = field<int>(doc, "workers", "");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig defaults) {
  try {
    return parse_config(read_text(path), std::move(defaults));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace camlight
