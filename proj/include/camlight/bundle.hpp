#pragma once

#include <filesystem>

#include "camlight/conditioning.hpp"

namespace camlight {

inline constexpr const char* kBundleFormat = "camlight-bundle";
inline constexpr int kBundleVersion = 1;

// Directory layout:
//   bundle.json            manifest (field names below are stable)
//   source/ target/ proj_views/ relit_sparse/ relit_proj/   RGB PNG frames
//   proj_masks/ relit_masks/                                 gray PNG masks
//   depths/*.pfm, trajectory.json
// Manifest: format, version, frame_count, width, height, modality, alpha,
// relit_index, propagation, streams{...}, depths, trajectory, intrinsics,
// provenance{depth_source, relit_source, degradation, mode}, blank.
void write_bundle(const ConditioningBundle& bundle, const std::filesystem::path& dir);

// Soft-mask streams get their exact alpha back from the manifest; the 8-bit
// files only have to agree with it to the byte.
ConditioningBundle read_bundle(const std::filesystem::path& dir);

}  // namespace camlight
