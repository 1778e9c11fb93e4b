#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "camlight/flow.hpp"
#include "camlight/image.hpp"

namespace camlight {

namespace fs = std::filesystem;

// Grayscale PFM: "Pf\n<w> <h>\n<scale>\n" then float32 rows bottom to top.
// A negative scale means little-endian. Writes always use "-1".
DepthMap decode_pfm(std::string_view bytes);
std::string encode_pfm(const DepthMap& depth);
DepthMap read_depth_pfm(const fs::path& path);
void write_depth_pfm(const fs::path& path, const DepthMap& depth);

// Binary PPM/PGM (P6/P5) with maxval 255.
Frame decode_ppm(std::string_view bytes);
std::string encode_ppm(const Frame& frame);
Mask decode_pgm(std::string_view bytes);
std::string encode_pgm(const Mask& mask);

// 8-bit PNG (RGB for frames, gray for masks) or PPM/PGM by content. Writers
// pick the format from the extension (.png, .ppm, .pgm).
Frame read_frame(const fs::path& path);
void write_frame(const fs::path& path, const Frame& frame);
Mask read_mask(const fs::path& path);
void write_mask(const fs::path& path, const Mask& mask);

// Middlebury .flo; invalid vectors are stored as 1e10 and read back invalid.
FlowField read_flow(const fs::path& path);
void write_flow(const fs::path& path, const FlowField& flow);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

// Regular files in `dir` with one of `extensions` (".png", ...), sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::vector<std::string>& extensions);

Video read_video_dir(const fs::path& dir);
std::vector<DepthMap> read_depth_dir(const fs::path& dir);
MaskVideo read_mask_dir(const fs::path& dir);
std::vector<FlowField> read_flow_dir(const fs::path& dir);

// "0007.png" style names.
std::string frame_name(std::size_t index, std::string_view extension);

}  // namespace camlight
