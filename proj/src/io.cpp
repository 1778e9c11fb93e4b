#include "camlight/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

namespace camlight {
namespace {

constexpr float kFloTag = 202021.25f;
constexpr float kFloInvalid = 1e10f;

std::string io_what(const fs::path& path, const std::string& message) { return path.string() + ": " + message; }

// Whitespace-separated header tokens with '#' comments, as in PNM.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("malformed header: unexpected end", "byte " + std::to_string(pos_));
    return std::string(bytes_.substr(start, pos_ - start));
  }

  template <typename T>
  T number(const char* what) {
    const std::string t = token();
    T value{};
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || end != t.data() + t.size()) {
      throw ParseError(std::string("malformed header: bad ") + what + " \"" + t + "\"", "byte " + std::to_string(pos_));
    }
    return value;
  }

  // Exactly one whitespace byte ends the header.
  std::size_t payload_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError("malformed header: missing separator before data", "byte " + std::to_string(pos_));
    }
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

float load_float(const char* p, bool little_endian) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if (little_endian != (std::endian::native == std::endian::little)) bits = byteswap32(bits);
  return std::bit_cast<float>(bits);
}

void store_le(std::string& out, std::uint32_t bits) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

struct Pnm {
  int channels = 0;
  int width = 0;
  int height = 0;
  std::string_view data;
};

Pnm decode_pnm(std::string_view bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  Pnm out;
  if (magic == "P6") {
    out.channels = 3;
  } else if (magic == "P5") {
    out.channels = 1;
  } else {
    throw ParseError("unsupported PNM magic \"" + magic + "\" (expected P6 or P5)", "byte 0");
  }
  out.width = header.number<int>("width");
  out.height = header.number<int>("height");
  const int maxval = header.number<int>("maxval");
  if (out.width < 1 || out.height < 1) throw ParseError("malformed header: non-positive size");
  if (maxval != 255) throw ParseError("unsupported bit depth: maxval " + std::to_string(maxval));
  const std::size_t start = header.payload_start();
  const std::size_t need = static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height) *
                           static_cast<std::size_t>(out.channels);
  if (bytes.size() < start + need) throw ParseError("truncated payload", "byte " + std::to_string(bytes.size()));
  out.data = bytes.substr(start, need);
  return out;
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

bool is_png(std::string_view bytes) {
  return bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0;
}

// Decodes an 8-bit PNG into `channels` bytes per pixel (3 or 1).
std::vector<std::uint8_t> decode_png(const fs::path& path, std::string_view bytes, int channels, int& width,
                                     int& height) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ParseError(io_what(path, std::string("malformed PNG: ") + image.message));
  }
  const png_uint_32 format = image.format;
  auto fail = [&](const std::string& message) {
    png_image_free(&image);
    throw ParseError(io_what(path, message));
  };
  if (format & PNG_FORMAT_FLAG_LINEAR) fail("unsupported bit depth: 16-bit PNG");
  const int file_channels = PNG_IMAGE_SAMPLE_CHANNELS(format);
  if (file_channels != channels) {
    fail("unsupported channel count: " + std::to_string(file_channels) + " (expected " + std::to_string(channels) +
         ")");
  }
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw ParseError(io_what(path, "malformed PNG: " + message));
  }
  return pixels;
}

void encode_png(const fs::path& path, const std::uint8_t* pixels, int width, int height, int channels) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels, 0, nullptr)) {
    throw IoError(io_what(path, std::string("cannot write PNG: ") + image.message));
  }
}

std::vector<std::uint8_t> frame_bytes(const Frame& frame) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(frame.size() * 3);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    bytes.push_back(to_byte(frame[i].r));
    bytes.push_back(to_byte(frame[i].g));
    bytes.push_back(to_byte(frame[i].b));
  }
  return bytes;
}

std::vector<std::uint8_t> mask_bytes(const Mask& mask) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(mask.size());
  for (float m : mask.values()) bytes.push_back(to_byte(m));
  return bytes;
}

Frame frame_from_bytes(const std::uint8_t* data, int width, int height) {
  Frame frame(width, height);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    frame[i] = {from_byte(data[3 * i]), from_byte(data[3 * i + 1]), from_byte(data[3 * i + 2])};
  }
  return frame;
}

Mask mask_from_bytes(const std::uint8_t* data, int width, int height) {
  Mask mask(width, height);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = from_byte(data[i]);
  return mask;
}

std::string pnm_header(const char* magic, int width, int height) {
  return std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
}

}  // namespace

DepthMap decode_pfm(std::string_view bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  if (magic == "PF") throw ParseError("expected grayscale PFM (Pf), got color (PF)", "byte 0");
  if (magic != "Pf") throw ParseError("malformed header: expected Pf, got \"" + magic + "\"", "byte 0");
  const int width = header.number<int>("width");
  const int height = header.number<int>("height");
  const double scale = header.number<double>("scale");
  if (width < 1 || height < 1) throw ParseError("malformed header: non-positive size");
  if (scale == 0.0 || !std::isfinite(scale)) throw ParseError("malformed header: scale must be nonzero");
  const bool little = scale < 0.0;
  const std::size_t start = header.payload_start();
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4;
  if (bytes.size() < start + need) throw ParseError("truncated payload", "byte " + std::to_string(bytes.size()));
  DepthMap depth(width, height);
  const char* p = bytes.data() + start;
  for (int row = height - 1; row >= 0; --row) {
    for (int u = 0; u < width; ++u, p += 4) depth(u, row) = load_float(p, little);
  }
  return depth;
}

std::string encode_pfm(const DepthMap& depth) {
  std::string out = "Pf\n" + std::to_string(depth.width()) + " " + std::to_string(depth.height()) + "\n-1\n";
  out.reserve(out.size() + depth.size() * 4);
  for (int row = depth.height() - 1; row >= 0; --row) {
    for (int u = 0; u < depth.width(); ++u) store_le(out, std::bit_cast<std::uint32_t>(depth(u, row)));
  }
  return out;
}

DepthMap read_depth_pfm(const fs::path& path) {
  try {
    return decode_pfm(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(io_what(path, e.what()));
  }
}

void write_depth_pfm(const fs::path& path, const DepthMap& depth) { write_text(path, encode_pfm(depth)); }

Frame decode_ppm(std::string_view bytes) {
  const Pnm pnm = decode_pnm(bytes);
  if (pnm.channels != 3) throw ParseError("unsupported channel count: 1 (expected 3)");
  return frame_from_bytes(reinterpret_cast<const std::uint8_t*>(pnm.data.data()), pnm.width, pnm.height);
}

std::string encode_ppm(const Frame& frame) {
  const std::vector<std::uint8_t> bytes = frame_bytes(frame);
  return pnm_header("P6", frame.width(), frame.height()) + std::string(bytes.begin(), bytes.end());
}

Mask decode_pgm(std::string_view bytes) {
  const Pnm pnm = decode_pnm(bytes);
  if (pnm.channels != 1) throw ParseError("unsupported channel count: 3 (expected 1)");
  return mask_from_bytes(reinterpret_cast<const std::uint8_t*>(pnm.data.data()), pnm.width, pnm.height);
}

std::string encode_pgm(const Mask& mask) {
  const std::vector<std::uint8_t> bytes = mask_bytes(mask);
  return pnm_header("P5", mask.width(), mask.height()) + std::string(bytes.begin(), bytes.end());
}

Frame read_frame(const fs::path& path) {
  const std::string bytes = read_text(path);
  if (is_png(bytes)) {
    int w = 0;
    int h = 0;
    const std::vector<std::uint8_t> pixels = decode_png(path, bytes, 3, w, h);
    return frame_from_bytes(pixels.data(), w, h);
  }
  try {
    return decode_ppm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(io_what(path, e.what()));
  }
}

void write_frame(const fs::path& path, const Frame& frame) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm") {
    write_text(path, encode_ppm(frame));
    return;
  }
  if (ext != ".png") throw IoError(io_what(path, "unsupported frame extension (use .png or .ppm)"));
  const std::vector<std::uint8_t> bytes = frame_bytes(frame);
  encode_png(path, bytes.data(), frame.width(), frame.height(), 3);
}

Mask read_mask(const fs::path& path) {
  const std::string bytes = read_text(path);
  if (is_png(bytes)) {
    int w = 0;
    int h = 0;
    const std::vector<std::uint8_t> pixels = decode_png(path, bytes, 1, w, h);
    return mask_from_bytes(pixels.data(), w, h);
  }
  try {
    return decode_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(io_what(path, e.what()));
  }
}

void write_mask(const fs::path& path, const Mask& mask) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    write_text(path, encode_pgm(mask));
    return;
  }
  if (ext != ".png") throw IoError(io_what(path, "unsupported mask extension (use .png or .pgm)"));
  const std::vector<std::uint8_t> bytes = mask_bytes(mask);
  encode_png(path, bytes.data(), mask.width(), mask.height(), 1);
}

FlowField read_flow(const fs::path& path) {
  const std::string bytes = read_text(path);
  if (bytes.size() < 12) throw ParseError(io_what(path, "truncated .flo header"));
  if (load_float(bytes.data(), true) != kFloTag) throw ParseError(io_what(path, "bad .flo tag"), "byte 0");
  std::int32_t w = 0;
  std::int32_t h = 0;
  std::uint32_t raw;
  std::memcpy(&raw, bytes.data() + 4, 4);
  w = static_cast<std::int32_t>(std::endian::native == std::endian::little ? raw : byteswap32(raw));
  std::memcpy(&raw, bytes.data() + 8, 4);
  h = static_cast<std::int32_t>(std::endian::native == std::endian::little ? raw : byteswap32(raw));
  if (w < 1 || h < 1) throw ParseError(io_what(path, "non-positive .flo size"), "byte 4");
  const std::size_t need = 12 + static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 8;
  if (bytes.size() < need) throw ParseError(io_what(path, "truncated payload"));
  FlowField flow(w, h);
  const char* p = bytes.data() + 12;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u, p += 8) {
      const float du = load_float(p, true);
      const float dv = load_float(p + 4, true);
      if (std::isfinite(du) && std::isfinite(dv) && std::fabs(du) <= 1e9f && std::fabs(dv) <= 1e9f) {
        flow.set(u, v, du, dv);
      }
    }
  }
  return flow;
}

void write_flow(const fs::path& path, const FlowField& flow) {
  std::string out;
  out.reserve(12 + flow.du.size() * 8);
  store_le(out, std::bit_cast<std::uint32_t>(kFloTag));
  store_le(out, static_cast<std::uint32_t>(flow.width()));
  store_le(out, static_cast<std::uint32_t>(flow.height()));
  for (std::size_t i = 0; i < flow.du.size(); ++i) {
    const bool ok = flow.is_valid(i);
    store_le(out, std::bit_cast<std::uint32_t>(ok ? flow.du[i] : kFloInvalid));
    store_le(out, std::bit_cast<std::uint32_t>(ok ? flow.dv[i] : kFloInvalid));
  }
  write_text(path, out);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(io_what(path, "cannot open for reading"));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(io_what(path, "read failed"));
  return buf.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(io_what(path, "cannot open for writing"));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(io_what(path, "write failed"));
}

std::vector<fs::path> list_files(const fs::path& dir, const std::vector<std::string>& extensions) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(io_what(dir, "not a directory"));
  std::vector<fs::path> out;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_extension(entry.path());
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Video read_video_dir(const fs::path& dir) {
  Video out;
  for (const fs::path& p : list_files(dir, {".png", ".ppm"})) out.push_back(read_frame(p));
  if (out.empty()) throw IoError(io_what(dir, "no .png/.ppm frames"));
  return out;
}

std::vector<DepthMap> read_depth_dir(const fs::path& dir) {
  std::vector<DepthMap> out;
  for (const fs::path& p : list_files(dir, {".pfm"})) out.push_back(read_depth_pfm(p));
  if (out.empty()) throw IoError(io_what(dir, "no .pfm depth maps"));
  return out;
}

MaskVideo read_mask_dir(const fs::path& dir) {
  MaskVideo out;
  for (const fs::path& p : list_files(dir, {".png", ".pgm"})) out.push_back(read_mask(p));
  if (out.empty()) throw IoError(io_what(dir, "no .png/.pgm masks"));
  return out;
}

std::vector<FlowField> read_flow_dir(const fs::path& dir) {
  std::vector<FlowField> out;
  for (const fs::path& p : list_files(dir, {".flo"})) out.push_back(read_flow(p));
  if (out.empty()) throw IoError(io_what(dir, "no .flo flow files"));
  return out;
}

std::string frame_name(std::size_t index, std::string_view extension) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return std::string(buf) + std::string(extension);
}

}  // namespace camlight
