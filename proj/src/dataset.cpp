#include "camlight/dataset.hpp"

#include <sstream>

#include <json.hpp>

#include "camlight/bundle.hpp"
#include "camlight/io.hpp"

namespace camlight {
namespace {

using nlohmann::json;

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<ManifestRecord> parse_manifest(std::string_view text) {
  std::vector<ManifestRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(number);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), where);
    }
    try {
      ManifestRecord r;
      r.line = number;
      r.clip_id = doc.at("clip_id").get<std::string>();
      r.source_class = source_class_from_string(doc.at("class").get<std::string>());
      if (doc.contains("strategy")) r.strategy = strategy_from_string(doc.at("strategy").get<std::string>());
      r.target_dir = doc.at("target_dir").get<std::string>();
      r.depth_dir = doc.at("depth_dir").get<std::string>();
      r.trajectory_path = doc.at("trajectory_path").get<std::string>();
      r.output_dir = doc.at("output_dir").get<std::string>();
      r.relit_path = doc.value("relit_path", "");
      r.flow_dir = doc.value("flow_dir", "");
      r.mask_dir = doc.value("mask_dir", "");
      r.background_path = doc.value("background_path", "");
      r.external_tag = doc.value("external_tag", r.relit_path.empty() ? "none" : r.relit_path);
      r.relit_index = doc.value("relit_index", 0);
      r.repeat_index = doc.value("repeat_index", 0);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), where);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), where);
    }
  }
  return out;
}

LightSynOptions lightsyn_options(const PipelineConfig& config) {
  LightSynOptions o;
  o.tau = config.tau;
  o.depth_tolerance = config.depth_tolerance;
  o.propagation = config.propagation;
  o.motion_threshold = config.motion_threshold;
  o.splat_radius = config.splat_radius;
  o.workers = config.workers;
  return o;
}

ClipInputs load_clip(const ManifestRecord& record, const fs::path& base, const PipelineConfig& config) {
  ClipInputs clip;
  clip.clip_id = record.clip_id;
  clip.source_class = record.source_class;
  clip.strategy = record.strategy;
  clip.target = read_video_dir(resolve(base, record.target_dir));
  clip.depths = read_depth_dir(resolve(base, record.depth_dir));
  clip.intrinsics = config.intrinsics_for(clip.target.front().width(), clip.target.front().height());
  const TrajectorySpec spec = parse_trajectory(read_text(resolve(base, record.trajectory_path)));
  clip.trajectory = expand(spec, static_cast<int>(clip.target.size()));
  if (!record.relit_path.empty()) {
    const fs::path p = resolve(base, record.relit_path);
    if (fs::is_directory(p)) {
      clip.external = read_video_dir(p);
    } else {
      clip.external = Video{read_frame(p)};
    }
  }
  clip.external_tag = record.external_tag;
  if (!record.flow_dir.empty()) clip.flows = read_flow_dir(resolve(base, record.flow_dir));
  if (!record.mask_dir.empty()) clip.compose_masks = read_mask_dir(resolve(base, record.mask_dir));
  if (!record.background_path.empty()) clip.compose_background = read_frame(resolve(base, record.background_path));
  clip.relit_index = record.relit_index;
  clip.repeat_index = record.repeat_index;
  return clip;
}

PairOutcome write_pair(const TrainingPair& pair, const std::string& clip_id, const fs::path& dir) {
  PairOutcome outcome;
  outcome.clip_id = clip_id;
  outcome.dir = dir;
  outcome.motion = pair.motion;
  outcome.kept = !pair.motion || pair.motion->keep;
  fs::create_directories(dir);
  if (outcome.kept) write_bundle(pair.bundle, dir);
  json doc = json::parse(pair.recipe.to_json());
  doc["clip_id"] = clip_id;
  doc["kept"] = outcome.kept;
  if (pair.motion) {
    doc["motion"] = {{"mean_magnitude", pair.motion->mean_magnitude},
                     {"threshold", pair.motion->threshold},
                     {"samples", pair.motion->samples},
                     {"keep", pair.motion->keep}};
  } else {
    doc["motion"] = nullptr;
  }
  write_text(dir / "recipe.json", doc.dump(2) + "\n");
  return outcome;
}

DegradationRecipe read_recipe(const fs::path& pair_dir) {
  return DegradationRecipe::from_json(read_text(pair_dir / "recipe.json"));
}

bool pair_kept(const fs::path& pair_dir) {
  try {
    return json::parse(read_text(pair_dir / "recipe.json")).value("kept", true);
  } catch (const json::exception& e) {
    throw ParseError((pair_dir / "recipe.json").string() + ": " + e.what());
  }
}

ReplayCheck replay_pair_dir(const fs::path& pair_dir, int workers) {
  const DegradationRecipe recipe = read_recipe(pair_dir);
  if (!pair_kept(pair_dir)) {
    ReplayCheck check;
    check.passed = false;
    check.mismatches.push_back("pair was rejected by the motion filter; no bundle to replay");
    return check;
  }
  return verify_replay(read_bundle(pair_dir), recipe, workers);
}

}  // namespace camlight
