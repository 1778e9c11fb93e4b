#include "camlight/conditioning.hpp"

#include "camlight/parallel.hpp"

namespace camlight {
namespace {

void require_lengths(std::size_t frames, std::size_t depths, std::size_t poses, const char* what) {
  if (frames != depths || frames != poses) {
    throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(frames) + " frames, " +
                         std::to_string(depths) + " depths, " + std::to_string(poses) + " poses)");
  }
}

CueStreams allocate(std::size_t frames) {
  CueStreams out;
  out.views.resize(frames);
  out.masks.resize(frames);
  return out;
}

}  // namespace

SparseRelitVideo SparseRelitVideo::from_frame(const Frame& relit, int relit_index, int frame_count) {
  if (frame_count < 1) throw ValidationError("sparse relit video needs at least one frame");
  if (relit_index < 0 || relit_index >= frame_count) {
    throw ValidationError("relit index " + std::to_string(relit_index) + " outside [0, " +
                          std::to_string(frame_count) + ")");
  }
  SparseRelitVideo out;
  out.relit_index = relit_index;
  out.frames.assign(static_cast<std::size_t>(frame_count), Frame::blank(relit.width(), relit.height()));
  out.frames[static_cast<std::size_t>(relit_index)] = relit;
  out.frames[static_cast<std::size_t>(relit_index)].set_blank(false);
  return out;
}

void SparseRelitVideo::validate() const {
  if (relit_index < 0 || static_cast<std::size_t>(relit_index) >= frames.size()) {
    throw ValidationError("sparse relit video: relit index out of range");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const bool expect_content = static_cast<int>(i) == relit_index;
    if (frames[i].is_blank() == expect_content) {
      throw ValidationError("sparse relit video: frame " + std::to_string(i) +
                            (expect_content ? " should hold the relit frame" : " should be blank"));
    }
    require_same_shape(frames[i].width(), frames[i].height(), frames[0].width(), frames[0].height(),
                       "sparse relit video");
  }
}

std::string_view to_string(Modality modality) {
  switch (modality) {
    case Modality::projected: return "projected";
    case Modality::ref: return "ref";
    case Modality::hdr: return "hdr";
  }
  return "projected";
}

Modality modality_from_string(std::string_view name) {
  if (name == "projected") return Modality::projected;
  if (name == "ref") return Modality::ref;
  if (name == "hdr") return Modality::hdr;
  throw ValidationError("unknown modality \"" + std::string(name) + "\" (expected projected, ref or hdr)");
}

std::optional<float> default_alpha(Modality modality) {
  switch (modality) {
    case Modality::ref: return kAlphaRef;
    case Modality::hdr: return kAlphaHdr;
    case Modality::projected: break;
  }
  return std::nullopt;
}

std::string_view to_string(PropagationMode mode) {
  return mode == PropagationMode::faithful ? "faithful" : "propagate";
}

PropagationMode propagation_from_string(std::string_view name) {
  if (name == "faithful") return PropagationMode::faithful;
  if (name == "propagate") return PropagationMode::propagate;
  throw ValidationError("unknown propagation mode \"" + std::string(name) + "\" (expected faithful or propagate)");
}

CueStreams build_source_cues(const Video& video, const std::vector<DepthMap>& depths, const CameraIntrinsics& k,
                             const Trajectory& trajectory, const ConditioningOptions& options) {
  require_lengths(video.size(), depths.size(), trajectory.size(), "build_source_cues");
  CueStreams out = allocate(video.size());
  parallel_for(video.size(), options.workers, [&](std::size_t i) {
    RenderedView view = project(backproject(video[i], depths[i], k), trajectory[i], k, options.render);
    out.views[i] = std::move(view.image);
    out.masks[i] = std::move(view.mask);
  });
  return out;
}

CueStreams build_relit_cues(const SparseRelitVideo& relit, const std::vector<DepthMap>& depths,
                            const CameraIntrinsics& k, const Trajectory& trajectory,
                            const ConditioningOptions& options) {
  require_lengths(relit.frames.size(), depths.size(), trajectory.size(), "build_relit_cues");
  relit.validate();
  CueStreams out = allocate(relit.frames.size());
  if (options.propagation == PropagationMode::propagate) {
    const auto r = static_cast<std::size_t>(relit.relit_index);
    const PointCloud cloud = backproject(relit.frames[r], depths[r], k);
    parallel_for(relit.frames.size(), options.workers, [&](std::size_t i) {
      RenderedView view = project(cloud, trajectory[i], k, options.render);
      out.views[i] = std::move(view.image);
      out.masks[i] = std::move(view.mask);
    });
  } else {
    parallel_for(relit.frames.size(), options.workers, [&](std::size_t i) {
      RenderedView view = project(backproject(relit.frames[i], depths[i], k), trajectory[i], k, options.render);
      out.views[i] = std::move(view.image);
      out.masks[i] = std::move(view.mask);
    });
  }
  return out;
}

CueStreams compose_modality(const IlluminationCondition& condition, const CueStreams& geometric) {
  if (condition.modality == Modality::projected) return geometric;
  if (!condition.payload) {
    throw ValidationError("modality " + std::string(to_string(condition.modality)) + " needs a conditioning image");
  }
  const Frame& image = *condition.payload;
  const float alpha = condition.alpha_override.value_or(*default_alpha(condition.modality));
  if (!(alpha >= 0.0f && alpha <= 1.0f)) throw ValidationError("soft-mask alpha must lie in [0, 1]");
  for (const Frame& f : geometric.views) {
    require_same_shape(image.width(), image.height(), f.width(), f.height(), "compose_modality: payload vs stream");
  }
  CueStreams out;
  Frame content = image;
  content.set_blank(false);
  out.views.assign(geometric.views.size(), content);
  out.masks.assign(geometric.views.size(), Mask(image.width(), image.height(), alpha));
  return out;
}

ConditioningBundle relighting_mode_rewrite(ConditioningBundle bundle) {
  bundle.proj_views = bundle.source;
  bundle.proj_masks.clear();
  for (const Frame& f : bundle.source) bundle.proj_masks.emplace_back(f.width(), f.height(), 1.0f);
  bundle.relit_proj = bundle.relit_sparse.frames;
  bundle.relit_masks.clear();
  for (std::size_t i = 0; i < bundle.relit_sparse.frames.size(); ++i) {
    const Frame& f = bundle.relit_sparse.frames[i];
    const float value = static_cast<int>(i) == bundle.relit_sparse.relit_index ? 1.0f : 0.0f;
    bundle.relit_masks.emplace_back(f.width(), f.height(), value);
  }
  return bundle;
}

Video compose_background(const Video& foreground, const MaskVideo& masks, const Frame& background) {
  if (foreground.size() != masks.size()) {
    throw DimensionError("compose_background: " + std::to_string(foreground.size()) + " frames but " +
                         std::to_string(masks.size()) + " masks");
  }
  Video out;
  out.reserve(foreground.size());
  for (std::size_t i = 0; i < foreground.size(); ++i) {
    const Frame& fg = foreground[i];
    const Mask& m = masks[i];
    require_same_shape(fg.width(), fg.height(), m.width(), m.height(), "compose_background: frame vs mask");
    require_same_shape(fg.width(), fg.height(), background.width(), background.height(),
                       "compose_background: frame vs background");
    Frame blended(fg.width(), fg.height());
    for (std::size_t p = 0; p < fg.size(); ++p) {
      const float a = m[p];
      if (!(a >= 0.0f && a <= 1.0f)) throw ValidationError("compose_background: mask values must lie in [0, 1]");
      const Rgb& f = fg[p];
      const Rgb& b = background[p];
      blended[p] = {a * f.r + (1.0f - a) * b.r, a * f.g + (1.0f - a) * b.g, a * f.b + (1.0f - a) * b.b};
    }
    out.push_back(std::move(blended));
  }
  return out;
}

ConditioningBundle assemble_bundle(const Video& source, const std::vector<DepthMap>& depths,
                                   const CameraIntrinsics& k, const Trajectory& trajectory,
                                   const SparseRelitVideo& relit, const IlluminationCondition& condition,
                                   const ConditioningOptions& options) {
  ConditioningBundle bundle;
  bundle.source = source;
  bundle.depths = depths;
  bundle.trajectory = trajectory;
  bundle.intrinsics = k;
  bundle.relit_sparse = relit;
  bundle.propagation = options.propagation;
  bundle.modality = condition.modality;
  if (condition.modality != Modality::projected) {
    bundle.alpha = condition.alpha_override.value_or(*default_alpha(condition.modality));
  }
  CueStreams geometric = build_source_cues(source, depths, k, trajectory, options);
  bundle.proj_views = std::move(geometric.views);
  bundle.proj_masks = std::move(geometric.masks);
  const CueStreams lighting =
      compose_modality(condition, build_relit_cues(relit, depths, k, trajectory, options));
  bundle.relit_proj = lighting.views;
  bundle.relit_masks = lighting.masks;
  return bundle;
}

BundleCheck check_bundle(const ConditioningBundle& bundle) {
  BundleCheck check;
  auto fail = [&](std::string message) {
    check.passed = false;
    check.failures.push_back(std::move(message));
  };
  const std::size_t f = bundle.source.size();
  if (f == 0) fail("bundle has no frames");
  auto count = [&](std::size_t n, const char* name) {
    if (n != f) fail(std::string(name) + ": " + std::to_string(n) + " frames, expected " + std::to_string(f));
  };
  count(bundle.proj_views.size(), "proj_views");
  count(bundle.proj_masks.size(), "proj_masks");
  count(bundle.relit_sparse.frames.size(), "relit_sparse");
  count(bundle.relit_proj.size(), "relit_proj");
  count(bundle.relit_masks.size(), "relit_masks");
  count(bundle.trajectory.size(), "trajectory");
  if (bundle.target) count(bundle.target->size(), "target");
  if (!check.passed) return check;

  const int w = bundle.width();
  const int h = bundle.height();
  auto shape = [&](int fw, int fh, const std::string& name) {
    if (fw != w || fh != h) fail(name + ": resolution " + std::to_string(fw) + "x" + std::to_string(fh));
  };
  auto masked_zero = [&](const Frame& view, const Mask& mask, const std::string& name) {
    for (std::size_t p = 0; p < view.size() && p < mask.size(); ++p) {
      if (mask[p] == 0.0f && !(view[p] == Rgb{})) {
        fail(name + ": nonzero content where mask is 0");
        return;
      }
    }
  };
  auto in_unit = [&](const Mask& mask, const std::string& name) {
    for (float m : mask.values()) {
      if (!(m >= 0.0f && m <= 1.0f)) {
        fail(name + ": mask value outside [0, 1]");
        return;
      }
    }
  };
  for (std::size_t i = 0; i < f; ++i) {
    const std::string tag = "[" + std::to_string(i) + "]";
    shape(bundle.source[i].width(), bundle.source[i].height(), "source" + tag);
    shape(bundle.proj_views[i].width(), bundle.proj_views[i].height(), "proj_views" + tag);
    shape(bundle.proj_masks[i].width(), bundle.proj_masks[i].height(), "proj_masks" + tag);
    shape(bundle.relit_sparse.frames[i].width(), bundle.relit_sparse.frames[i].height(), "relit_sparse" + tag);
    shape(bundle.relit_proj[i].width(), bundle.relit_proj[i].height(), "relit_proj" + tag);
    shape(bundle.relit_masks[i].width(), bundle.relit_masks[i].height(), "relit_masks" + tag);
    if (bundle.target) shape((*bundle.target)[i].width(), (*bundle.target)[i].height(), "target" + tag);
    if (!check.passed) return check;
    in_unit(bundle.proj_masks[i], "proj_masks" + tag);
    in_unit(bundle.relit_masks[i], "relit_masks" + tag);
    masked_zero(bundle.proj_views[i], bundle.proj_masks[i], "proj_views" + tag);
    masked_zero(bundle.relit_proj[i], bundle.relit_masks[i], "relit_proj" + tag);
  }
  if (!bundle.depths.empty()) {
    count(bundle.depths.size(), "depths");
    for (std::size_t i = 0; i < bundle.depths.size(); ++i) {
      shape(bundle.depths[i].width(), bundle.depths[i].height(), "depths[" + std::to_string(i) + "]");
    }
  }
  try {
    bundle.relit_sparse.validate();
  } catch (const ValidationError& e) {
    fail(e.what());
  }
  return check;
}

}  // namespace camlight
