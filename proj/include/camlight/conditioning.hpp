#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camlight/camera.hpp"
#include "camlight/geometry.hpp"
#include "camlight/image.hpp"
#include "camlight/trajectory.hpp"

namespace camlight {

// A rendered view stream with its per-frame masks.
struct CueStreams {
  Video views;
  MaskVideo masks;
};

// A video where only `relit_index` holds content and every other frame is blank.
struct SparseRelitVideo {
  Video frames;
  int relit_index = 0;

  static SparseRelitVideo from_frame(const Frame& relit, int relit_index, int frame_count);

  const Frame& relit_frame() const { return frames.at(static_cast<std::size_t>(relit_index)); }
  // Throws ValidationError unless exactly frame `relit_index` is non-blank.
  void validate() const;
};

enum class Modality { projected, ref, hdr };

inline constexpr float kAlphaRef = 0.25f;
inline constexpr float kAlphaHdr = 0.50f;

std::string_view to_string(Modality modality);
Modality modality_from_string(std::string_view name);
// Soft-mask value for ref/hdr; nullopt for the geometric modality.
std::optional<float> default_alpha(Modality modality);

struct IlluminationCondition {
  Modality modality = Modality::projected;
  std::optional<Frame> payload;  // V_ref / V_hdr image for the soft-mask modalities
  std::optional<float> alpha_override;
};

// How the sparse relit video is lifted. `faithful` lifts every frame with its
// own depth, so blank frames give empty renders; `propagate` lifts the relit
// frame once with its depth and renders it under every pose.
enum class PropagationMode { faithful, propagate };

std::string_view to_string(PropagationMode mode);
PropagationMode propagation_from_string(std::string_view name);

struct Provenance {
  std::string depth_source = "external";
  std::string relit_source = "external";
  std::string degradation;  // serialized recipe, empty for inference bundles
  std::string mode = "joint";
};

struct ConditioningBundle {
  Video source;                 // V^s
  std::optional<Video> target;  // V^t, training only
  Video proj_views;             // V^p
  MaskVideo proj_masks;         // V^m
  SparseRelitVideo relit_sparse;  // sparse relit video
  Video relit_proj;             // relit projections
  MaskVideo relit_masks;        // relit masks (binary or soft)
  Trajectory trajectory;
  std::vector<DepthMap> depths;
  CameraIntrinsics intrinsics;
  Modality modality = Modality::projected;
  std::optional<float> alpha;
  PropagationMode propagation = PropagationMode::propagate;
  Provenance provenance;

  int frame_count() const noexcept { return static_cast<int>(source.size()); }
  int width() const noexcept { return source.empty() ? 0 : source.front().width(); }
  int height() const noexcept { return source.empty() ? 0 : source.front().height(); }
};

struct ConditioningOptions {
  RenderOptions render;  // render.workers is used inside a frame
  int workers = 0;       // frame-level parallelism
  PropagationMode propagation = PropagationMode::propagate;
};

// Frame i: project(backproject(video[i], depths[i], k), trajectory[i], k).
CueStreams build_source_cues(const Video& video, const std::vector<DepthMap>& depths, const CameraIntrinsics& k,
                             const Trajectory& trajectory, const ConditioningOptions& options = {});

// Relit lifting always uses the source depths.
CueStreams build_relit_cues(const SparseRelitVideo& relit, const std::vector<DepthMap>& depths,
                            const CameraIntrinsics& k, const Trajectory& trajectory,
                            const ConditioningOptions& options = {});

// projected: pass-through. ref/hdr: payload replicated on every frame and a
// constant alpha mask (0.25 for ref, 0.50 for hdr unless overridden).
CueStreams compose_modality(const IlluminationCondition& condition, const CueStreams& geometric);

// Rewrites a bundle for relighting without camera motion: V^p = V^s, V^m = 1,
// relit projections = sparse relit video, relit masks = 1 on the relit frame
// and 0 elsewhere.
ConditioningBundle relighting_mode_rewrite(ConditioningBundle bundle);

// out = m * fg + (1 - m) * bg per pixel and channel.
Video compose_background(const Video& foreground, const MaskVideo& masks, const Frame& background);

// Full joint-mode assembly: geometric cues, relit cues, then modality.
ConditioningBundle assemble_bundle(const Video& source, const std::vector<DepthMap>& depths,
                                   const CameraIntrinsics& k, const Trajectory& trajectory,
                                   const SparseRelitVideo& relit, const IlluminationCondition& condition,
                                   const ConditioningOptions& options = {});

struct BundleCheck {
  bool passed = true;
  std::vector<std::string> failures;
};

// Stream counts and resolutions agree, masks lie in [0, 1], views are zero
// wherever their mask is zero, and the sparse relit video is well formed.
BundleCheck check_bundle(const ConditioningBundle& bundle);

}  // namespace camlight
