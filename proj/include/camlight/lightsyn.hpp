#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camlight/conditioning.hpp"
#include "camlight/flow.hpp"

namespace camlight {

enum class SourceClass { static_scene, dynamic_scene, ai_generated };

// static: frame_repeat | clip_pair. dynamic: reproject | relight_then_reproject
// | reproject_then_relight. ai_generated: passthrough.
enum class Strategy { frame_repeat, clip_pair, reproject, relight_then_reproject, reproject_then_relight, passthrough };

std::string_view to_string(SourceClass c);
SourceClass source_class_from_string(std::string_view name);
std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);
Strategy default_strategy(SourceClass c, bool has_external);

// How the input view came to be, for a reproject transform.
//   warp          input frames are the target frames backward-warped by us
//   repeat_frame  input view is frame `repeat_index` of the clip, repeated
//   external_clip input frames are another clip of the same scene
//   external_view the target frames are an external novel view of the input
enum class ReprojectMode { warp, repeat_frame, external_clip, external_view };

struct RecordedTransform {
  enum class Kind { reproject, external_relight, compose };

  Kind kind = Kind::reproject;
  bool invertible = true;
  bool geometry_preserving = false;

  // reproject: per-frame target-camera to input-camera poses.
  ReprojectMode mode = ReprojectMode::warp;
  Trajectory poses;
  int repeat_index = -1;

  // external_relight: opaque tag plus the view ("target" or "input") the
  // relit content lives in.
  std::string tag;
  std::string view;

  // compose: free-form description of the blend.
  std::string params;
};

struct DegradationRecipe {
  std::vector<RecordedTransform> transforms;
  SourceClass source_class = SourceClass::dynamic_scene;
  Strategy strategy = Strategy::reproject;
  // Which view the once-estimated depths belong to.
  std::string depth_view = "target";
  int relit_index = 0;
  PropagationMode propagation = PropagationMode::propagate;
  double tau = 1.0;
  double depth_tolerance = 0.05;
  int splat_radius = 0;
  bool roles_swapped = false;  // ai_generated: original clip is the input

  const RecordedTransform& reproject() const;
  std::string to_json() const;
  static DegradationRecipe from_json(std::string_view text);
};

struct MotionVerdict {
  bool keep = true;
  double mean_magnitude = 0.0;
  double threshold = 2.0;
  std::size_t samples = 0;
};

// Mean |flow| over valid pixels of every frame; keep iff <= threshold.
MotionVerdict motion_filter(const std::vector<FlowField>& flows, double threshold);

enum class NoiseScale { standard_deviation, variance };

// D' = D (1 + eps), eps ~ N(0, rate) with `rate` the standard deviation (or
// the variance under NoiseScale::variance). Invalid pixels are left alone;
// results that drop to <= 0 become invalid (0). A fixed seed gives the same
// map, and the underlying standard normal draws do not depend on rate.
DepthMap inject_depth_noise(const DepthMap& depth, double rate, std::uint64_t seed,
                            NoiseScale scale = NoiseScale::standard_deviation);

struct LightSynOptions {
  double tau = 1.0;
  double depth_tolerance = 0.05;
  PropagationMode propagation = PropagationMode::propagate;
  double motion_threshold = 2.0;
  int splat_radius = 0;
  int workers = 0;
};

struct ClipInputs {
  std::string clip_id;
  SourceClass source_class = SourceClass::dynamic_scene;
  std::optional<Strategy> strategy;
  Video target;                   // the recorded clip
  std::vector<DepthMap> depths;   // estimated once from `target`
  CameraIntrinsics intrinsics;
  // dynamic/static: target camera -> input camera per frame.
  // ai_generated: original camera -> novel view the external clip follows.
  Trajectory trajectory;
  std::optional<Video> external;  // relit frames, second clip, or generated clip
  std::string external_tag = "external";
  std::vector<FlowField> flows;   // optional externally estimated flows
  int relit_index = 0;
  int repeat_index = 0;
  // Optional appearance blend applied to the input video last.
  std::optional<MaskVideo> compose_masks;
  std::optional<Frame> compose_background;
};

struct TrainingPair {
  Video target;
  Video degraded;
  ConditioningBundle bundle;
  DegradationRecipe recipe;
  SourceClass source_class = SourceClass::dynamic_scene;
  std::optional<MotionVerdict> motion;
};

// Per-frame geometry between the target view and the input view.
struct PairGeometry {
  std::vector<DepthMap> target_depths;
  std::vector<DepthMap> input_depths;
  Trajectory target_to_input;
};

PairGeometry pair_geometry(const DegradationRecipe& recipe, const std::vector<DepthMap>& depths,
                           const CameraIntrinsics& k, int workers = 0);

// Flows both ways for one frame and the visibility masks that gate warps.
struct Correspondence {
  FlowField target_to_input;
  FlowField input_to_target;
  Mask target_visible;
  Mask input_visible;
};

Correspondence correspond(const DepthMap& target_depth, const DepthMap& input_depth, const CameraPose& target_to_input,
                          const CameraIntrinsics& k, double tau, double depth_tolerance);

struct LightSynCues {
  CueStreams source;  // target-aligned views of the input video
  SparseRelitVideo relit_sparse;
  CueStreams relit;   // target-aligned views of the sparse relit frame
};

// Conditioning cues from the recorded inverses: the input video is warped
// back into the target views, the target's relit-index frame is carried into
// the input view and back. Deterministic in its arguments.
LightSynCues replay_recipe(const DegradationRecipe& recipe, const Video& input, const Video& target,
                           const std::vector<DepthMap>& depths, const CameraIntrinsics& k, int workers = 0);

// Builds the degraded input, the recipe and the aligned bundle for one clip.
// External inputs are required for every strategy except reproject and
// frame_repeat. Frames go through 8-bit quantization so a pair reloaded from
// disk replays bit-exactly.
TrainingPair synthesize_pair(const ClipInputs& clip, const LightSynOptions& options = {});

struct ReplayCheck {
  bool passed = true;
  std::vector<std::string> mismatches;
};

// Replays the pair's recipe on its own input video and compares every cue
// stream bit for bit.
ReplayCheck verify_replay(const ConditioningBundle& bundle, const DegradationRecipe& recipe, int workers = 0);

}  // namespace camlight
