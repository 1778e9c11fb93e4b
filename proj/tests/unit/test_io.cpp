#include <doctest.h>

#include <json.hpp>
#include <png.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "camlight/bundle.hpp"
#include "camlight/config.hpp"
#include "camlight/dataset.hpp"
#include "camlight/io.hpp"
#include "oracles/oracles.hpp"

using namespace camlight;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("camlight-io-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no ParseError";
}

// Writes a PNG with an arbitrary simplified-API format.
void write_raw_png(const fs::path& path, int w, int h, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image), 7);
  REQUIRE(png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr));
}

}  // namespace

TEST_CASE("pfm golden bytes") {
  DepthMap d(2, 2);
  d(0, 0) = 1.0f;
  d(1, 0) = 2.0f;
  d(0, 1) = 3.0f;
  d(1, 1) = 4.0f;
  // Bottom row first, little-endian float32.
  const std::string expected = std::string("Pf\n2 2\n-1\n") +
                               std::string("\x00\x00\x40\x40\x00\x00\x80\x40\x00\x00\x80\x3f\x00\x00\x00\x40", 16);
  CHECK(encode_pfm(d) == expected);
  CHECK(decode_pfm(expected) == d);
  CHECK(encode_pfm(decode_pfm(expected)) == expected);
}

TEST_CASE("pfm errors and big-endian input") {
  CHECK(error_of([] { decode_pfm("PF\n1 1\n-1\n123456789012"); }).find("expected grayscale") != std::string::npos);
  CHECK(error_of([] { decode_pfm(std::string("Pf\n2 2\n-1\n\0\0\0", 13)); }).find("truncated payload") !=
        std::string::npos);
  CHECK_THROWS_AS(decode_pfm("P6\n2 2\n255\n"), ParseError);
  const DepthMap be = decode_pfm(std::string("Pf\n1 1\n1.0\n\x3f\x80\x00\x00", 15));
  CHECK(be(0, 0) == 1.0f);
}

TEST_CASE("pfm round trip keeps invalid values") {
  std::mt19937_64 rng(1);
  const DepthMap d = oracle::random_depth(rng, 13, 7, 0.3);
  const DepthMap back = decode_pfm(encode_pfm(d));
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::isnan(d[i])) CHECK(std::isnan(back[i]));
    else CHECK(back[i] == d[i]);
  }
}

TEST_CASE("ppm and pgm") {
  const Frame white = decode_ppm(std::string("P6\n1 1\n255\n\xff\xff\xff", 14));
  CHECK(white(0, 0) == Rgb{1, 1, 1});
  std::mt19937_64 rng(2);
  const Frame f = oracle::random_frame(rng, 5, 3);
  CHECK(decode_ppm(encode_ppm(f)) == f);
  CHECK(error_of([] { decode_ppm("P6\n1 1\n65535\n"); }).find("unsupported bit depth") != std::string::npos);
  CHECK(error_of([] { decode_ppm("P6\n2 1\n255\nabc"); }).find("truncated payload") != std::string::npos);
  CHECK(error_of([] { decode_ppm("P5\n1 1\n255\n\x10"); }).find("unsupported channel count") != std::string::npos);
  Mask m(3, 2, 0.0f);
  m(1, 1) = 1.0f;
  CHECK(decode_pgm(encode_pgm(m)) == m);
  CHECK(decode_ppm("P6\n# comment\n1 1\n255\n\x01\x02\x03") == Frame(1, 1, {from_byte(1), from_byte(2), from_byte(3)}));
}

TEST_CASE("png round trip and rejected formats") {
  const fs::path dir = scratch("png");
  std::mt19937_64 rng(3);
  const Frame f = oracle::random_frame(rng, 11, 6);
  write_frame(dir / "f.png", f);
  CHECK(read_frame(dir / "f.png") == f);
  write_frame(dir / "g.png", read_frame(dir / "f.png"));
  CHECK(read_text(dir / "g.png") == read_text(dir / "f.png"));
  write_frame(dir / "f.ppm", f);
  CHECK(read_frame(dir / "f.ppm") == f);
  Mask m(4, 4, 0.25f);
  write_mask(dir / "m.png", m);
  CHECK(read_mask(dir / "m.png") == quantize8(m));

  write_raw_png(dir / "deep.png", 3, 3, PNG_FORMAT_LINEAR_RGB);
  CHECK(error_of([&] { read_frame(dir / "deep.png"); }).find("unsupported bit depth") != std::string::npos);
  write_raw_png(dir / "rgba.png", 3, 3, PNG_FORMAT_RGBA);
  CHECK(error_of([&] { read_frame(dir / "rgba.png"); }).find("unsupported channel count") != std::string::npos);
  CHECK(error_of([&] { read_mask(dir / "rgba.png"); }).find("unsupported channel count") != std::string::npos);
  write_text(dir / "junk.png", "not a png");
  CHECK_THROWS_AS(read_frame(dir / "junk.png"), ParseError);
  CHECK_THROWS_AS(read_frame(dir / "missing.png"), IoError);
  CHECK_THROWS_AS(write_frame(dir / "f.jpg", f), IoError);
  fs::remove_all(dir);
}

TEST_CASE("flo round trip") {
  const fs::path dir = scratch("flo");
  FlowField flow(5, 4);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 5; ++u)
      if ((u + v) % 3) flow.set(u, v, u * 0.5f - 1, -v * 0.25f);
  write_flow(dir / "a.flo", flow);
  CHECK(read_flow(dir / "a.flo") == flow);
  write_text(dir / "b.flo", "PIEH");
  CHECK_THROWS_AS(read_flow(dir / "b.flo"), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("directory listings") {
  const fs::path dir = scratch("list");
  for (std::size_t i : {2u, 0u, 1u}) write_frame(dir / frame_name(i, ".png"), Frame(2, 2));
  write_text(dir / "notes.txt", "x");
  const auto files = list_files(dir, {".png"});
  REQUIRE(files.size() == 3);
  CHECK(files[0].filename() == "0000.png");
  CHECK(files[2].filename() == "0002.png");
  CHECK(read_video_dir(dir).size() == 3);
  CHECK_THROWS_AS(read_depth_dir(dir), IoError);
  CHECK_THROWS_AS(read_video_dir(dir / "nope"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("bundle round trip") {
  std::mt19937_64 rng(4);
  const int w = 12, h = 8, f = 3;
  Video src;
  std::vector<DepthMap> depths;
  Trajectory traj;
  for (int i = 0; i < f; ++i) {
    src.push_back(oracle::random_frame(rng, w, h));
    depths.push_back(oracle::random_depth(rng, w, h, 0.1, 1.0f, 5.0f));
    traj.push_back(oracle::random_small_pose(rng, 0.05, 0.1));
  }
  const auto sparse = SparseRelitVideo::from_frame(oracle::random_frame(rng, w, h), 1, f);
  for (Modality m : {Modality::projected, Modality::ref, Modality::hdr}) {
    const IlluminationCondition cond{m, oracle::random_frame(rng, w, h), std::nullopt};
    ConditioningBundle b = assemble_bundle(src, depths, CameraIntrinsics::default_for(w, h), traj, sparse, cond);
    b.target = src;
    b.provenance.degradation = R"({"strategy":"reproject"})";
    const fs::path dir = scratch("bundle");
    write_bundle(b, dir);
    const ConditioningBundle r = read_bundle(dir);
    CHECK(r.source == b.source);
    CHECK(r.target == b.target);
    CHECK(r.proj_views == b.proj_views);
    CHECK(r.proj_masks == b.proj_masks);
    CHECK(r.relit_sparse.frames == b.relit_sparse.frames);
    CHECK(r.relit_sparse.relit_index == 1);
    CHECK(r.relit_proj == b.relit_proj);
    CHECK(r.relit_masks == b.relit_masks);  // exact alpha, not its byte
    CHECK(r.modality == m);
    CHECK(r.alpha == b.alpha);
    CHECK(r.intrinsics == b.intrinsics);
    CHECK(nlohmann::json::parse(r.provenance.degradation) == nlohmann::json::parse(b.provenance.degradation));
    REQUIRE(r.depths.size() == b.depths.size());
    for (std::size_t i = 0; i < depths.size(); ++i) {
      for (std::size_t p = 0; p < depths[i].size(); ++p) {
        if (std::isnan(depths[i][p])) CHECK(std::isnan(r.depths[i][p]));
        else CHECK(r.depths[i][p] == depths[i][p]);
      }
    }
    REQUIRE(r.trajectory.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
      CHECK(r.trajectory[i].rotation.isApprox(traj[i].rotation, 1e-12));
      CHECK(r.trajectory[i].translation == traj[i].translation);
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("bundle manifest errors") {
  const fs::path dir = scratch("badbundle");
  CHECK_THROWS_AS(read_bundle(dir), Error);
  write_text(dir / "bundle.json", R"({"format":"other","version":1})");
  CHECK_THROWS_AS(read_bundle(dir), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("config parsing and defaults") {
  const PipelineConfig d;
  CHECK(d.width == 672);
  CHECK(d.height == 384);
  CHECK(d.frame_count == 49);
  CHECK(d.tau == 1.0);
  CHECK(d.propagation == PropagationMode::propagate);
  const PipelineConfig c = parse_config(R"({"width":64,"intrinsics":{"fx":50},"modality":"hdr",
      "noise":{"rate":0.02,"seed":9,"scale":"variance"},"trajectory_spec":{"preset":"pan"}})");
  CHECK(c.width == 64);
  CHECK(c.height == 384);
  CHECK(c.intrinsics().fx == 50);
  CHECK(c.intrinsics().fy == doctest::Approx(0.58 * 64));
  CHECK(c.modality == Modality::hdr);
  CHECK(c.noise_seed == 9u);
  CHECK(c.noise_scale == NoiseScale::variance);
  CHECK_FALSE(c.trajectory_inline.empty());
  // A file only overrides what it names; later layers override earlier ones.
  PipelineConfig base;
  base.tau = 2.5;
  CHECK(parse_config(R"({"width":10})", base).tau == 2.5);
  CHECK(parse_config(R"({"tau":0.5})", base).tau == 0.5);
  try {
    parse_config(R"({"noise":{"sigma":1}})");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.where() == "/noise/sigma");
  }
  CHECK_THROWS_AS(parse_config(R"({"width":"wide"})"), ParseError);
  CHECK_THROWS_AS(parse_config("{"), ParseError);
  PipelineConfig bad;
  bad.noise_rate = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_NOTHROW(PipelineConfig{}.validate());
}

TEST_CASE("manifest parsing") {
  const auto records = parse_manifest(
      R"({"clip_id":"a","class":"static","target_dir":"t","depth_dir":"d","trajectory_path":"p.json","output_dir":"o"})"
      "\n\n"
      R"({"clip_id":"b","class":"dynamic","strategy":"reproject","target_dir":"t","depth_dir":"d",)"
      R"("trajectory_path":"p.json","output_dir":"o","relit_index":3})");
  REQUIRE(records.size() == 2);
  CHECK(records[0].source_class == SourceClass::static_scene);
  CHECK_FALSE(records[0].strategy);
  CHECK(records[1].strategy == Strategy::reproject);
  CHECK(records[1].relit_index == 3);
  CHECK(records[1].line == 3);
  try {
    parse_manifest("\n{\"clip_id\":\"a\"}");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.where() == "line 2");
  }
  CHECK_THROWS_AS(parse_manifest(R"({"clip_id":"a","class":"cartoon","target_dir":"t","depth_dir":"d",)"
                                 R"("trajectory_path":"p","output_dir":"o"})"),
                  ParseError);
}
