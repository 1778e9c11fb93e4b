#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "camlight/camera.hpp"
#include "camlight/conditioning.hpp"
#include "camlight/lightsyn.hpp"

namespace camlight {

struct PipelineConfig {
  int width = 672;
  int height = 384;
  int frame_count = kDefaultFrameCount;
  // Unset focal/principal entries fall back to CameraIntrinsics::default_for.
  std::optional<double> fx, fy, cx, cy;
  std::string trajectory_path;
  std::string trajectory_inline;  // trajectory document text
  Modality modality = Modality::projected;
  std::optional<float> alpha;
  PropagationMode propagation = PropagationMode::propagate;
  double tau = 1.0;
  double depth_tolerance = 0.05;
  int splat_radius = 0;
  double noise_rate = 0.0;
  std::uint64_t noise_seed = 0;
  NoiseScale noise_scale = NoiseScale::standard_deviation;
  double motion_threshold = 2.0;
  int workers = 0;

  CameraIntrinsics intrinsics() const;
  // For frames whose size is only known after loading.
  CameraIntrinsics intrinsics_for(int frame_width, int frame_height) const;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Recognized keys: width, height, frame_count, intrinsics{fx, fy, cx, cy},
// trajectory (path), trajectory_spec (inline document), modality, alpha,
// propagation, tau, depth_tolerance, splat_radius,
// noise{rate, seed, scale: "std"|"variance"}, motion_threshold, workers.
// Unknown keys are rejected.
PipelineConfig parse_config(std::string_view text, PipelineConfig defaults = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig defaults = {});

std::string_view to_string(NoiseScale scale);
NoiseScale noise_scale_from_string(std::string_view name);

}  // namespace camlight
