#include "camlight/lightsyn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <random>

#include <json.hpp>

#include "camlight/parallel.hpp"

namespace camlight {
namespace {

using nlohmann::json;

std::string_view to_string(ReprojectMode m) {
  switch (m) {
    case ReprojectMode::warp: return "warp";
    case ReprojectMode::repeat_frame: return "repeat_frame";
    case ReprojectMode::external_clip: return "external_clip";
    case ReprojectMode::external_view: return "external_view";
  }
  return "warp";
}

ReprojectMode reproject_mode_from_string(std::string_view name) {
  if (name == "warp") return ReprojectMode::warp;
  if (name == "repeat_frame") return ReprojectMode::repeat_frame;
  if (name == "external_clip") return ReprojectMode::external_clip;
  if (name == "external_view") return ReprojectMode::external_view;
  throw ParseError("unknown reproject mode \"" + std::string(name) + "\"", "/transforms");
}

std::string_view to_string(RecordedTransform::Kind k) {
  switch (k) {
    case RecordedTransform::Kind::reproject: return "reproject";
    case RecordedTransform::Kind::external_relight: return "external_relight";
    case RecordedTransform::Kind::compose: return "compose";
  }
  return "reproject";
}

RecordedTransform::Kind kind_from_string(std::string_view name) {
  if (name == "reproject") return RecordedTransform::Kind::reproject;
  if (name == "external_relight") return RecordedTransform::Kind::external_relight;
  if (name == "compose") return RecordedTransform::Kind::compose;
  throw ParseError("unknown transform kind \"" + std::string(name) + "\"", "/transforms");
}

json pose_to_json(const CameraPose& pose) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.push_back(pose.rotation(i, j));
  }
  return {{"R", r}, {"t", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

CameraPose pose_from_json(const json& node) {
  CameraPose pose;
  const json& r = node.at("R");
  const json& t = node.at("t");
  if (r.size() != 9 || t.size() != 3) throw ParseError("pose needs R[9] and t[3]", "/transforms/poses");
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) pose.rotation(i, j) = r[static_cast<std::size_t>(3 * i + j)].get<double>();
    pose.translation[i] = t[static_cast<std::size_t>(i)].get<double>();
  }
  return pose;
}

Mask depth_validity(const DepthMap& depth) {
  Mask m(depth.width(), depth.height(), 0.0f);
  for (std::size_t i = 0; i < depth.size(); ++i) m[i] = is_valid_depth(depth[i]) ? 1.0f : 0.0f;
  return m;
}

// Splatted depth is only trusted away from depth edges: a pixel whose
// 4-neighbour differs by more than `rel_tol` (relative) may carry the
// neighbouring surface's depth from half a pixel away.
DepthMap trim_depth_edges(const DepthMap& depth, double rel_tol) {
  DepthMap out = depth;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const float d = depth(u, v);
      if (!is_valid_depth(d)) continue;
      bool edge = false;
      for (const auto& [du, dv] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        if (!depth.contains(u + du, v + dv)) continue;
        const float n = depth(u + du, v + dv);
        if (is_valid_depth(n) && std::abs(static_cast<double>(n) - d) > rel_tol * std::min(n, d)) edge = true;
      }
      if (edge) out(u, v) = 0.0f;
    }
  }
  return out;
}

Trajectory inverted(const Trajectory& poses) {
  Trajectory out;
  out.reserve(poses.size());
  for (const CameraPose& p : poses) out.push_back(p.inverse());
  return out;
}

// Degraded-view validity: warped frames are valid where the warp succeeded;
// external input frames wherever the input view has depth.
Mask input_validity(const DegradationRecipe& recipe, const Correspondence& c, const DepthMap& input_depth) {
  if (recipe.reproject().mode == ReprojectMode::warp) {
    return mask_and(warp_mask(c.input_to_target), c.input_visible);
  }
  return depth_validity(input_depth);
}

LightSynCues compute_cues(const DegradationRecipe& recipe, const PairGeometry& geo, const Video& input,
                          const Video& target, const CameraIntrinsics& k, int workers) {
  const std::size_t f = input.size();
  if (target.size() != f || geo.target_to_input.size() != f) {
    throw DimensionError("light-syn cues: input, target and pose counts differ");
  }
  if (recipe.relit_index < 0 || static_cast<std::size_t>(recipe.relit_index) >= f) {
    throw ValidationError("relit index out of range");
  }
  LightSynCues cues;
  cues.source.views.resize(f);
  cues.source.masks.resize(f);
  cues.relit.views.resize(f);
  cues.relit.masks.resize(f);

  parallel_for(f, workers, [&](std::size_t i) {
    const Correspondence c = correspond(geo.target_depths[i], geo.input_depths[i], geo.target_to_input[i], k,
                                       recipe.tau, recipe.depth_tolerance);
    const Mask valid = input_validity(recipe, c, geo.input_depths[i]);
    WarpResult back = gated(backward_warp(input[i], c.target_to_input, &valid), c.target_visible);
    cues.source.views[i] = quantize8(back.image);
    cues.source.masks[i] = std::move(back.mask);
  });

  // The target's relit-index frame carried into the input view.
  const auto r = static_cast<std::size_t>(recipe.relit_index);
  const Correspondence cr = correspond(geo.target_depths[r], geo.input_depths[r], geo.target_to_input[r], k,
                                       recipe.tau, recipe.depth_tolerance);
  WarpResult relit = gated(backward_warp(target[r], cr.input_to_target), cr.input_visible);
  relit.image = quantize8(relit.image);
  cues.relit_sparse = SparseRelitVideo::from_frame(relit.image, recipe.relit_index, static_cast<int>(f));
  const Mask relit_valid = relit.mask;

  parallel_for(f, workers, [&](std::size_t i) {
    const int w = input[i].width();
    const int h = input[i].height();
    if (recipe.propagation == PropagationMode::faithful && i != r) {
      cues.relit.views[i] = Frame(w, h);
      cues.relit.masks[i] = Mask(w, h, 0.0f);
      return;
    }
    // Target frame i mapped into the relit frame's input view.
    const FlowField to_relit = derive_flow(geo.target_depths[i], geo.target_to_input[r], k);
    const Mask visible = mask_and(fb_consistency(to_relit, cr.input_to_target, recipe.tau),
                                  depth_consistency(geo.target_depths[i], geo.target_to_input[r], k,
                                                    geo.input_depths[r], recipe.depth_tolerance));
    WarpResult back = gated(backward_warp(relit.image, to_relit, &relit_valid), visible);
    cues.relit.views[i] = quantize8(back.image);
    cues.relit.masks[i] = std::move(back.mask);
  });
  return cues;
}

void require_clip_shapes(const ClipInputs& clip) {
  const std::size_t f = clip.target.size();
  if (f == 0) throw ValidationError("clip " + clip.clip_id + ": no frames");
  if (clip.depths.size() != f) {
    throw DimensionError("clip " + clip.clip_id + ": " + std::to_string(f) + " frames but " +
                         std::to_string(clip.depths.size()) + " depth maps");
  }
  if (clip.trajectory.size() != f) {
    throw DimensionError("clip " + clip.clip_id + ": " + std::to_string(f) + " frames but " +
                         std::to_string(clip.trajectory.size()) + " poses");
  }
  const CameraIntrinsics& k = clip.intrinsics;
  k.validate();
  for (std::size_t i = 0; i < f; ++i) {
    require_same_shape(clip.target[i].width(), clip.target[i].height(), k.width, k.height, "clip frame");
    require_same_shape(clip.depths[i].width(), clip.depths[i].height(), k.width, k.height, "clip depth");
  }
  if (clip.external) {
    for (const Frame& e : *clip.external) {
      require_same_shape(e.width(), e.height(), k.width, k.height, "external relit input");
    }
  }
  const TrajectoryReport report = validate(clip.trajectory);
  if (!report.passed) {
    throw ValidationError("non-invertible transform: reproject pose at frame " +
                          std::to_string(report.failing_frames().front()) + " is not a rotation");
  }
}

const Video& require_external(const ClipInputs& clip, std::size_t frames, const char* what) {
  if (!clip.external) throw ValidationError("clip " + clip.clip_id + ": missing relit input (" + what + ")");
  if (clip.external->size() != frames) {
    throw DimensionError("clip " + clip.clip_id + ": external input has " + std::to_string(clip.external->size()) +
                         " frames, expected " + std::to_string(frames));
  }
  return *clip.external;
}

RecordedTransform reproject_step(ReprojectMode mode, Trajectory poses) {
  RecordedTransform t;
  t.kind = RecordedTransform::Kind::reproject;
  t.mode = mode;
  t.poses = std::move(poses);
  t.invertible = true;
  return t;
}

RecordedTransform relight_step(const std::string& tag, const char* view) {
  RecordedTransform t;
  t.kind = RecordedTransform::Kind::external_relight;
  t.tag = tag;
  t.view = view;
  t.geometry_preserving = true;
  t.invertible = true;
  return t;
}

Video warp_into_input(const Video& source, const PairGeometry& geo, const DegradationRecipe& recipe,
                      const CameraIntrinsics& k, int workers) {
  Video out(source.size());
  parallel_for(source.size(), workers, [&](std::size_t i) {
    const Correspondence c = correspond(geo.target_depths[i], geo.input_depths[i], geo.target_to_input[i], k,
                                        recipe.tau, recipe.depth_tolerance);
    out[i] = gated(backward_warp(source[i], c.input_to_target), c.input_visible).image;
  });
  return out;
}

}  // namespace

std::string_view to_string(SourceClass c) {
  switch (c) {
    case SourceClass::static_scene: return "static";
    case SourceClass::dynamic_scene: return "dynamic";
    case SourceClass::ai_generated: return "ai_generated";
  }
  return "dynamic";
}

SourceClass source_class_from_string(std::string_view name) {
  if (name == "static") return SourceClass::static_scene;
  if (name == "dynamic") return SourceClass::dynamic_scene;
  if (name == "ai_generated") return SourceClass::ai_generated;
  throw ValidationError("unknown source class \"" + std::string(name) +
                        "\" (expected static, dynamic or ai_generated)");
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::frame_repeat: return "frame_repeat";
    case Strategy::clip_pair: return "clip_pair";
    case Strategy::reproject: return "reproject";
    case Strategy::relight_then_reproject: return "relight_then_reproject";
    case Strategy::reproject_then_relight: return "reproject_then_relight";
    case Strategy::passthrough: return "passthrough";
  }
  return "reproject";
}

Strategy strategy_from_string(std::string_view name) {
  for (Strategy s : {Strategy::frame_repeat, Strategy::clip_pair, Strategy::reproject, Strategy::relight_then_reproject,
                     Strategy::reproject_then_relight, Strategy::passthrough}) {
    if (name == to_string(s)) return s;
  }
  throw ValidationError("unknown strategy \"" + std::string(name) + "\"");
}

Strategy default_strategy(SourceClass c, bool has_external) {
  switch (c) {
    case SourceClass::static_scene: return Strategy::frame_repeat;
    case SourceClass::dynamic_scene: return has_external ? Strategy::relight_then_reproject : Strategy::reproject;
    case SourceClass::ai_generated: return Strategy::passthrough;
  }
  return Strategy::reproject;
}

const RecordedTransform& DegradationRecipe::reproject() const {
  for (const RecordedTransform& t : transforms) {
    if (t.kind == RecordedTransform::Kind::reproject) return t;
  }
  throw ValidationError("recipe has no reproject transform");
}

std::string DegradationRecipe::to_json() const {
  json doc;
  doc["source_class"] = std::string(camlight::to_string(source_class));
  doc["strategy"] = std::string(camlight::to_string(strategy));
  doc["depth_view"] = depth_view;
  doc["relit_index"] = relit_index;
  doc["propagation"] = std::string(camlight::to_string(propagation));
  doc["tau"] = tau;
  doc["depth_tolerance"] = depth_tolerance;
  doc["splat_radius"] = splat_radius;
  doc["roles_swapped"] = roles_swapped;
  json list = json::array();
  for (const RecordedTransform& t : transforms) {
    json node{{"kind", std::string(to_string(t.kind))},
              {"invertible", t.invertible},
              {"geometry_preserving", t.geometry_preserving}};
    switch (t.kind) {
      case RecordedTransform::Kind::reproject: {
        node["mode"] = std::string(to_string(t.mode));
        if (t.mode == ReprojectMode::repeat_frame) node["repeat_index"] = t.repeat_index;
        json poses = json::array();
        for (const CameraPose& p : t.poses) poses.push_back(pose_to_json(p));
        node["poses"] = std::move(poses);
        break;
      }
      case RecordedTransform::Kind::external_relight:
        node["tag"] = t.tag;
        node["view"] = t.view;
        break;
      case RecordedTransform::Kind::compose:
        node["params"] = t.params;
        break;
    }
    list.push_back(std::move(node));
  }
  doc["transforms"] = std::move(list);
  return doc.dump(2);
}

DegradationRecipe DegradationRecipe::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), "byte " + std::to_string(e.byte));
  }
  try {
    DegradationRecipe r;
    r.source_class = source_class_from_string(doc.at("source_class").get<std::string>());
    r.strategy = strategy_from_string(doc.at("strategy").get<std::string>());
    r.depth_view = doc.at("depth_view").get<std::string>();
    r.relit_index = doc.at("relit_index").get<int>();
    r.propagation = propagation_from_string(doc.at("propagation").get<std::string>());
    r.tau = doc.at("tau").get<double>();
    r.depth_tolerance = doc.at("depth_tolerance").get<double>();
    r.splat_radius = doc.value("splat_radius", 0);
    r.roles_swapped = doc.value("roles_swapped", false);
    for (const json& node : doc.at("transforms")) {
      RecordedTransform t;
      t.kind = kind_from_string(node.at("kind").get<std::string>());
      t.invertible = node.value("invertible", true);
      t.geometry_preserving = node.value("geometry_preserving", false);
      switch (t.kind) {
        case RecordedTransform::Kind::reproject:
          t.mode = reproject_mode_from_string(node.at("mode").get<std::string>());
          t.repeat_index = node.value("repeat_index", -1);
          for (const json& p : node.at("poses")) t.poses.push_back(pose_from_json(p));
          break;
        case RecordedTransform::Kind::external_relight:
          t.tag = node.at("tag").get<std::string>();
          t.view = node.at("view").get<std::string>();
          break;
        case RecordedTransform::Kind::compose:
          t.params = node.value("params", "");
          break;
      }
      r.transforms.push_back(std::move(t));
    }
    if (r.depth_view != "target" && r.depth_view != "input") throw ParseError("depth_view must be target or input");
    r.reproject();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed recipe: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("malformed recipe: ") + e.what());
  }
}

MotionVerdict motion_filter(const std::vector<FlowField>& flows, double threshold) {
  if (flows.empty()) throw ValidationError("motion_filter: no flow fields");
  MotionVerdict verdict;
  verdict.threshold = threshold;
  double sum = 0.0;
  for (const FlowField& flow : flows) {
    for (std::size_t i = 0; i < flow.du.size(); ++i) {
      if (!flow.is_valid(i)) continue;
      const double u = flow.du[i];
      const double v = flow.dv[i];
      sum += std::sqrt(u * u + v * v);
      ++verdict.samples;
    }
  }
  verdict.mean_magnitude = verdict.samples ? sum / static_cast<double>(verdict.samples) : 0.0;
  verdict.keep = verdict.mean_magnitude <= threshold;
  return verdict;
}

DepthMap inject_depth_noise(const DepthMap& depth, double rate, std::uint64_t seed, NoiseScale scale) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw ValidationError("depth noise rate must be >= 0");
  const double sigma = scale == NoiseScale::variance ? std::sqrt(rate) : rate;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  DepthMap out = depth;
  for (float& d : out.values()) {
    if (!is_valid_depth(d)) continue;
    const double noisy = static_cast<double>(d) * (1.0 + sigma * unit(rng));
    d = noisy > 0.0 ? static_cast<float>(noisy) : 0.0f;
    if (!is_valid_depth(d)) d = 0.0f;
  }
  return out;
}

PairGeometry pair_geometry(const DegradationRecipe& recipe, const std::vector<DepthMap>& depths,
                           const CameraIntrinsics& k, int workers) {
  const RecordedTransform& step = recipe.reproject();
  if (step.poses.size() != depths.size()) {
    throw DimensionError("recipe has " + std::to_string(step.poses.size()) + " poses for " +
                         std::to_string(depths.size()) + " depth maps");
  }
  RenderOptions render;
  render.splat_radius = recipe.splat_radius;
  PairGeometry geo;
  geo.target_to_input = step.poses;
  const std::size_t f = depths.size();
  if (recipe.depth_view == "target") {
    geo.target_depths = depths;
    geo.input_depths.resize(f);
    if (step.mode == ReprojectMode::repeat_frame) {
      if (step.repeat_index < 0 || static_cast<std::size_t>(step.repeat_index) >= f) {
        throw ValidationError("repeat index out of range");
      }
      geo.input_depths.assign(f, depths[static_cast<std::size_t>(step.repeat_index)]);
    } else {
      parallel_for(f, workers, [&](std::size_t i) {
        geo.input_depths[i] =
            trim_depth_edges(render_depth(depths[i], step.poses[i], k, render), recipe.depth_tolerance);
      });
    }
  } else {
    geo.input_depths = depths;
    geo.target_depths.resize(f);
    parallel_for(f, workers, [&](std::size_t i) {
      geo.target_depths[i] =
          trim_depth_edges(render_depth(depths[i], step.poses[i].inverse(), k, render), recipe.depth_tolerance);
    });
  }
  return geo;
}

Correspondence correspond(const DepthMap& target_depth, const DepthMap& input_depth, const CameraPose& target_to_input,
                          const CameraIntrinsics& k, double tau, double depth_tolerance) {
  const CameraPose input_to_target = target_to_input.inverse();
  Correspondence c;
  c.target_to_input = derive_flow(target_depth, target_to_input, k);
  c.input_to_target = derive_flow(input_depth, input_to_target, k);
  c.target_visible = mask_and(fb_consistency(c.target_to_input, c.input_to_target, tau),
                              depth_consistency(target_depth, target_to_input, k, input_depth, depth_tolerance));
  c.input_visible = mask_and(fb_consistency(c.input_to_target, c.target_to_input, tau),
                             depth_consistency(input_depth, input_to_target, k, target_depth, depth_tolerance));
  return c;
}

LightSynCues replay_recipe(const DegradationRecipe& recipe, const Video& input, const Video& target,
                           const std::vector<DepthMap>& depths, const CameraIntrinsics& k, int workers) {
  const PairGeometry geo = pair_geometry(recipe, depths, k, workers);
  return compute_cues(recipe, geo, input, target, k, workers);
}

TrainingPair synthesize_pair(const ClipInputs& clip, const LightSynOptions& options) {
  require_clip_shapes(clip);
  const std::size_t f = clip.target.size();
  const int frames = static_cast<int>(f);
  const CameraIntrinsics& k = clip.intrinsics;
  const Strategy strategy = clip.strategy.value_or(default_strategy(clip.source_class, clip.external.has_value()));

  const bool compatible =
      (clip.source_class == SourceClass::static_scene &&
       (strategy == Strategy::frame_repeat || strategy == Strategy::clip_pair)) ||
      (clip.source_class == SourceClass::dynamic_scene &&
       (strategy == Strategy::reproject || strategy == Strategy::relight_then_reproject ||
        strategy == Strategy::reproject_then_relight)) ||
      (clip.source_class == SourceClass::ai_generated && strategy == Strategy::passthrough);
  if (!compatible) {
    throw ValidationError("strategy " + std::string(to_string(strategy)) + " does not apply to " +
                          std::string(to_string(clip.source_class)) + " clips");
  }
  if (clip.relit_index < 0 || clip.relit_index >= frames) throw ValidationError("relit index out of range");

  DegradationRecipe recipe;
  recipe.source_class = clip.source_class;
  recipe.strategy = strategy;
  recipe.relit_index = clip.relit_index;
  recipe.propagation = options.propagation;
  recipe.tau = options.tau;
  recipe.depth_tolerance = options.depth_tolerance;
  recipe.splat_radius = options.splat_radius;

  const Video original = quantize8(clip.target);
  Video input;
  Video target = original;
  switch (strategy) {
    case Strategy::frame_repeat: {
      if (clip.repeat_index < 0 || clip.repeat_index >= frames) throw ValidationError("repeat index out of range");
      RecordedTransform step = reproject_step(ReprojectMode::repeat_frame, clip.trajectory);
      step.repeat_index = clip.repeat_index;
      recipe.transforms.push_back(std::move(step));
      Frame repeated = original[static_cast<std::size_t>(clip.repeat_index)];
      if (clip.external) {
        if (clip.external->size() != 1 && clip.external->size() != f) {
          throw DimensionError("frame_repeat: relit input must hold 1 or " + std::to_string(f) + " frames");
        }
        repeated = clip.external->size() == 1 ? clip.external->front()
                                              : (*clip.external)[static_cast<std::size_t>(clip.repeat_index)];
        recipe.transforms.push_back(relight_step(clip.external_tag, "input"));
      }
      input.assign(f, repeated);
      break;
    }
    case Strategy::clip_pair:
      recipe.transforms.push_back(reproject_step(ReprojectMode::external_clip, clip.trajectory));
      input = require_external(clip, f, "relit partner clip");
      recipe.transforms.push_back(relight_step(clip.external_tag, "input"));
      break;
    case Strategy::reproject:
    case Strategy::relight_then_reproject: {
      const Video* source = &original;
      Video relit;
      if (strategy == Strategy::relight_then_reproject) {
        relit = quantize8(require_external(clip, f, "relit target video"));
        source = &relit;
        recipe.transforms.push_back(relight_step(clip.external_tag, "target"));
      }
      recipe.transforms.push_back(reproject_step(ReprojectMode::warp, clip.trajectory));
      const PairGeometry geo = pair_geometry(recipe, clip.depths, k, options.workers);
      input = warp_into_input(*source, geo, recipe, k, options.workers);
      break;
    }
    case Strategy::reproject_then_relight:
      recipe.transforms.push_back(reproject_step(ReprojectMode::warp, clip.trajectory));
      input = require_external(clip, f, "relit reprojection");
      recipe.transforms.push_back(relight_step(clip.external_tag, "input"));
      break;
    case Strategy::passthrough:
      // The generated clip follows `trajectory` away from the original and is
      // the supervision target; the original clip is the input.
      recipe.roles_swapped = true;
      recipe.depth_view = "input";
      recipe.transforms.push_back(reproject_step(ReprojectMode::external_view, inverted(clip.trajectory)));
      recipe.transforms.push_back(relight_step(clip.external_tag, "target"));
      input = original;
      target = quantize8(require_external(clip, f, "generated clip"));
      break;
  }

  if (clip.compose_masks || clip.compose_background) {
    if (!clip.compose_masks || !clip.compose_background) {
      throw ValidationError("compose needs both foreground masks and a background frame");
    }
    input = compose_background(input, *clip.compose_masks, *clip.compose_background);
    RecordedTransform step;
    step.kind = RecordedTransform::Kind::compose;
    step.invertible = false;
    step.geometry_preserving = true;
    step.params = "foreground masks over background";
    recipe.transforms.push_back(std::move(step));
  }
  input = quantize8(input);

  const PairGeometry geo = pair_geometry(recipe, clip.depths, k, options.workers);
  LightSynCues cues = compute_cues(recipe, geo, input, target, k, options.workers);

  TrainingPair pair;
  pair.source_class = clip.source_class;
  if (clip.source_class == SourceClass::ai_generated) {
    std::vector<FlowField> flows = clip.flows;
    if (flows.empty()) {
      for (std::size_t i = 0; i < f; ++i) flows.push_back(derive_flow(geo.input_depths[i], clip.trajectory[i], k));
    }
    pair.motion = motion_filter(flows, options.motion_threshold);
  }

  ConditioningBundle& b = pair.bundle;
  b.source = input;
  b.target = target;
  b.proj_views = std::move(cues.source.views);
  b.proj_masks = std::move(cues.source.masks);
  b.relit_sparse = std::move(cues.relit_sparse);
  b.relit_proj = std::move(cues.relit.views);
  b.relit_masks = std::move(cues.relit.masks);
  b.trajectory = inverted(geo.target_to_input);
  b.depths = clip.depths;
  b.intrinsics = k;
  b.modality = Modality::projected;
  b.propagation = options.propagation;
  b.provenance.depth_source = "estimated once from the " + recipe.depth_view + " view";
  b.provenance.relit_source = clip.external ? clip.external_tag : "none";
  b.provenance.degradation = recipe.to_json();
  b.provenance.mode = "training";

  pair.target = std::move(target);
  pair.degraded = std::move(input);
  pair.recipe = std::move(recipe);
  return pair;
}

ReplayCheck verify_replay(const ConditioningBundle& bundle, const DegradationRecipe& recipe, int workers) {
  ReplayCheck check;
  if (!bundle.target) {
    check.passed = false;
    check.mismatches.push_back("bundle has no target stream");
    return check;
  }
  const LightSynCues cues = replay_recipe(recipe, bundle.source, *bundle.target, bundle.depths, bundle.intrinsics,
                                          workers);
  auto compare = [&](bool equal, const char* name) {
    if (!equal) {
      check.passed = false;
      check.mismatches.emplace_back(name);
    }
  };
  compare(cues.source.views == bundle.proj_views, "proj_views");
  compare(cues.source.masks == bundle.proj_masks, "proj_masks");
  compare(cues.relit_sparse.relit_index == bundle.relit_sparse.relit_index &&
              cues.relit_sparse.frames == bundle.relit_sparse.frames,
          "relit_sparse");
  compare(cues.relit.views == bundle.relit_proj, "relit_proj");
  compare(cues.relit.masks == bundle.relit_masks, "relit_masks");
  return check;
}

}  // namespace camlight
