#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camlight/config.hpp"
#include "camlight/lightsyn.hpp"

namespace camlight {

// One line of a dataset manifest (newline-delimited JSON). Required:
// clip_id, class, target_dir, depth_dir, trajectory_path, output_dir.
// Optional: relit_path (directory or single image), strategy, relit_index,
// repeat_index, flow_dir, external_tag, mask_dir + background_path.
// Relative paths resolve against the manifest's directory.
struct ManifestRecord {
  std::string clip_id;
  SourceClass source_class = SourceClass::dynamic_scene;
  std::optional<Strategy> strategy;
  std::string target_dir;
  std::string depth_dir;
  std::string relit_path;
  std::string trajectory_path;
  std::string output_dir;
  std::string flow_dir;
  std::string mask_dir;
  std::string background_path;
  std::string external_tag = "external";
  int relit_index = 0;
  int repeat_index = 0;
  int line = 0;
};

// Blank lines are skipped; errors carry "line N".
std::vector<ManifestRecord> parse_manifest(std::string_view text);

LightSynOptions lightsyn_options(const PipelineConfig& config);

// Loads frames, depths, trajectory (expanded to the clip length) and the
// optional external inputs. Intrinsics come from `config` at the frames' size.
ClipInputs load_clip(const ManifestRecord& record, const std::filesystem::path& base, const PipelineConfig& config);

struct PairOutcome {
  std::string clip_id;
  std::filesystem::path dir;
  bool kept = true;
  std::optional<MotionVerdict> motion;
};

// recipe.json always; the bundle only for kept pairs. recipe.json holds the
// recipe fields plus clip_id, kept and motion.
PairOutcome write_pair(const TrainingPair& pair, const std::string& clip_id, const std::filesystem::path& dir);

DegradationRecipe read_recipe(const std::filesystem::path& pair_dir);
bool pair_kept(const std::filesystem::path& pair_dir);

// Reloads a pair directory and replays its recipe against the stored cues.
ReplayCheck replay_pair_dir(const std::filesystem::path& pair_dir, int workers = 0);

}  // namespace camlight
