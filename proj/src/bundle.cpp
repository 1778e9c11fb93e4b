#include "camlight/bundle.hpp"

#include <json.hpp>

#include "camlight/io.hpp"

namespace camlight {
namespace {

using nlohmann::json;

json write_frames(const fs::path& root, const std::string& stream, const Video& frames) {
  fs::create_directories(root / stream);
  json paths = json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string rel = stream + "/" + frame_name(i, ".png");
    write_frame(root / rel, frames[i]);
    paths.push_back(rel);
  }
  return paths;
}

json write_masks(const fs::path& root, const std::string& stream, const MaskVideo& masks) {
  fs::create_directories(root / stream);
  json paths = json::array();
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const std::string rel = stream + "/" + frame_name(i, ".png");
    write_mask(root / rel, masks[i]);
    paths.push_back(rel);
  }
  return paths;
}

std::vector<std::string> path_list(const json& manifest, const char* stream, std::size_t frames) {
  const json& node = manifest.at("streams").at(stream);
  std::vector<std::string> out = node.get<std::vector<std::string>>();
  if (out.size() != frames) {
    throw ParseError("stream lists " + std::to_string(out.size()) + " files for " + std::to_string(frames) + " frames",
                     std::string("/streams/") + stream);
  }
  return out;
}

Video read_frames(const fs::path& root, const std::vector<std::string>& paths) {
  Video out;
  out.reserve(paths.size());
  for (const std::string& p : paths) out.push_back(read_frame(root / p));
  return out;
}

MaskVideo read_masks(const fs::path& root, const std::vector<std::string>& paths) {
  MaskVideo out;
  out.reserve(paths.size());
  for (const std::string& p : paths) out.push_back(read_mask(root / p));
  return out;
}

}  // namespace

void write_bundle(const ConditioningBundle& bundle, const fs::path& dir) {
  const std::size_t f = bundle.source.size();
  if (bundle.relit_sparse.frames.size() != f) throw DimensionError("bundle: sparse relit video length differs");
  fs::create_directories(dir);

  json manifest;
  manifest["format"] = kBundleFormat;
  manifest["version"] = kBundleVersion;
  manifest["frame_count"] = f;
  manifest["width"] = bundle.width();
  manifest["height"] = bundle.height();
  manifest["modality"] = std::string(to_string(bundle.modality));
  manifest["alpha"] = bundle.alpha ? json(*bundle.alpha) : json();
  manifest["relit_index"] = bundle.relit_sparse.relit_index;
  manifest["propagation"] = std::string(to_string(bundle.propagation));

  json streams;
  streams["source"] = write_frames(dir, "source", bundle.source);
  streams["target"] = bundle.target ? write_frames(dir, "target", *bundle.target) : json();
  streams["proj_views"] = write_frames(dir, "proj_views", bundle.proj_views);
  streams["proj_masks"] = write_masks(dir, "proj_masks", bundle.proj_masks);
  streams["relit_sparse"] = write_frames(dir, "relit_sparse", bundle.relit_sparse.frames);
  streams["relit_proj"] = write_frames(dir, "relit_proj", bundle.relit_proj);
  streams["relit_masks"] = write_masks(dir, "relit_masks", bundle.relit_masks);
  manifest["streams"] = std::move(streams);

  json blank = json::array();
  for (const Frame& fr : bundle.relit_sparse.frames) blank.push_back(fr.is_blank());
  manifest["blank"] = std::move(blank);

  fs::create_directories(dir / "depths");
  json depths = json::array();
  for (std::size_t i = 0; i < bundle.depths.size(); ++i) {
    const std::string rel = "depths/" + frame_name(i, ".pfm");
    write_depth_pfm(dir / rel, bundle.depths[i]);
    depths.push_back(rel);
  }
  manifest["depths"] = std::move(depths);

  write_text(dir / "trajectory.json", serialize_poses(bundle.trajectory) + "\n");
  manifest["trajectory"] = "trajectory.json";

  const CameraIntrinsics& k = bundle.intrinsics;
  manifest["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width},
                            {"height", k.height}};
  const Provenance& p = bundle.provenance;
  manifest["provenance"] = {{"depth_source", p.depth_source},
                            {"relit_source", p.relit_source},
                            {"degradation", p.degradation.empty() ? json() : json::parse(p.degradation)},
                            {"mode", p.mode}};
  write_text(dir / "bundle.json", manifest.dump(2) + "\n");
}

ConditioningBundle read_bundle(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text(dir / "bundle.json"));
  } catch (const json::parse_error& e) {
    throw ParseError((dir / "bundle.json").string() + ": " + e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != kBundleFormat) throw ParseError("not a bundle manifest", "/format");
    if (manifest.at("version").get<int>() != kBundleVersion) throw ParseError("unsupported version", "/version");
    const auto f = manifest.at("frame_count").get<std::size_t>();

    ConditioningBundle b;
    b.modality = modality_from_string(manifest.at("modality").get<std::string>());
    if (!manifest.at("alpha").is_null()) b.alpha = manifest.at("alpha").get<float>();
    b.propagation = propagation_from_string(manifest.at("propagation").get<std::string>());

    b.source = read_frames(dir, path_list(manifest, "source", f));
    if (!manifest.at("streams").at("target").is_null()) b.target = read_frames(dir, path_list(manifest, "target", f));
    b.proj_views = read_frames(dir, path_list(manifest, "proj_views", f));
    b.proj_masks = read_masks(dir, path_list(manifest, "proj_masks", f));
    b.relit_sparse.frames = read_frames(dir, path_list(manifest, "relit_sparse", f));
    b.relit_sparse.relit_index = manifest.at("relit_index").get<int>();
    b.relit_proj = read_frames(dir, path_list(manifest, "relit_proj", f));
    b.relit_masks = read_masks(dir, path_list(manifest, "relit_masks", f));

    const auto blank = manifest.at("blank").get<std::vector<bool>>();
    if (blank.size() != f) throw ParseError("blank flags do not cover every frame", "/blank");
    for (std::size_t i = 0; i < f; ++i) b.relit_sparse.frames[i].set_blank(blank[i]);

    if (b.alpha) {
      const std::uint8_t expected = to_byte(*b.alpha);
      for (Mask& m : b.relit_masks) {
        for (float& v : m.values()) {
          if (to_byte(v) != expected) throw ParseError("relit mask disagrees with manifest alpha", "/alpha");
          v = *b.alpha;
        }
      }
    }

    for (const json& p : manifest.at("depths")) b.depths.push_back(read_depth_pfm(dir / p.get<std::string>()));
    const std::string traj_text = read_text(dir / manifest.at("trajectory").get<std::string>());
    const TrajectorySpec spec = parse_trajectory(traj_text);
    b.trajectory = expand(spec, natural_frame_count(spec));

    const json& k = manifest.at("intrinsics");
    b.intrinsics.fx = k.at("fx").get<double>();
    b.intrinsics.fy = k.at("fy").get<double>();
    b.intrinsics.cx = k.at("cx").get<double>();
    b.intrinsics.cy = k.at("cy").get<double>();
    b.intrinsics.width = k.at("width").get<int>();
    b.intrinsics.height = k.at("height").get<int>();

    const json& p = manifest.at("provenance");
    b.provenance.depth_source = p.at("depth_source").get<std::string>();
    b.provenance.relit_source = p.at("relit_source").get<std::string>();
    b.provenance.degradation = p.at("degradation").is_null() ? "" : p.at("degradation").dump(2);
    b.provenance.mode = p.at("mode").get<std::string>();
    return b;
  } catch (const json::exception& e) {
    throw ParseError((dir / "bundle.json").string() + ": " + e.what());
  }
}

}  // namespace camlight
