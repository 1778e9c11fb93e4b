#include <doctest.h>

#include <filesystem>
#include <random>

#include "camlight/dataset.hpp"
#include "camlight/lightsyn.hpp"
#include "camlight/synthetic.hpp"
#include "oracles/oracles.hpp"

using namespace camlight;
namespace fs = std::filesystem;

namespace {

// One 8-bit code value plus float slack.
constexpr double kOneCode = 1.0 / 255.0 + 1e-6;

CameraPose translation(double x, double y, double z) {
  CameraPose p;
  p.translation = {x, y, z};
  return p;
}

ClipInputs flat_clip(const Video& frames, float depth, const Trajectory& trajectory, const CameraIntrinsics& k) {
  ClipInputs clip;
  clip.clip_id = "flat";
  clip.source_class = SourceClass::dynamic_scene;
  clip.target = frames;
  clip.depths.assign(frames.size(), DepthMap(k.width, k.height, depth));
  clip.trajectory = trajectory;
  clip.intrinsics = k;
  return clip;
}

ClipInputs scene_clip(bool moving, SourceClass c, int frames = 4) {
  const CameraIntrinsics k = CameraIntrinsics::default_for(48, 32);
  const SyntheticScene scene = demo_scene(moving);
  ClipInputs clip;
  clip.clip_id = "scene";
  clip.source_class = c;
  clip.intrinsics = k;
  for (int i = 0; i < frames; ++i) {
    const SceneRender r = scene.render(CameraPose::identity(), k, i);
    clip.target.push_back(r.image);
    clip.depths.push_back(r.depth);
    clip.trajectory.push_back(translation(0.1 + 0.02 * i, 0, 0));
  }
  return clip;
}

double max_masked_error(const Video& a, const Video& b, const MaskVideo& masks, std::size_t* covered = nullptr) {
  double worst = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t p = 0; p < a[i].size(); ++p) {
      if (masks[i][p] == 0.0f) continue;
      ++n;
      worst = std::max({worst, std::abs(double(a[i][p].r) - b[i][p].r), std::abs(double(a[i][p].g) - b[i][p].g),
                        std::abs(double(a[i][p].b) - b[i][p].b)});
    }
  }
  if (covered) *covered = n;
  return worst;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("camlight-unit-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("null degradation reduces to the identity bundle") {
  std::mt19937_64 rng(1);
  const CameraIntrinsics k = CameraIntrinsics::default_for(20, 12);
  Video frames;
  for (int i = 0; i < 3; ++i) frames.push_back(oracle::random_frame(rng, 20, 12));
  const TrainingPair pair = synthesize_pair(flat_clip(frames, 3.0f, Trajectory(3), k));
  CHECK(pair.degraded == frames);
  CHECK(pair.bundle.proj_views == frames);
  for (const Mask& m : pair.bundle.proj_masks)
    for (float x : m.values()) CHECK(x == 1.0f);
  CHECK(pair.recipe.transforms.size() == 1);
  CHECK(check_bundle(pair.bundle).passed);
}

TEST_CASE("integer pan round trip recovers the target exactly") {
  std::mt19937_64 rng(2);
  const CameraIntrinsics k{50, 50, 15.5, 9.5, 32, 20};
  Video frames;
  for (int i = 0; i < 3; ++i) frames.push_back(oracle::random_frame(rng, 32, 20));
  // fx * tx / d = 2 px.
  const TrainingPair pair = synthesize_pair(flat_clip(frames, 5.0f, Trajectory(3, translation(0.2, 0, 0)), k));
  std::size_t covered = 0;
  CHECK(max_masked_error(pair.bundle.proj_views, frames, pair.bundle.proj_masks, &covered) <= kOneCode);
  CHECK(covered >= 3u * 28u * 20u);
}

TEST_CASE("fractional pan on a ramp stays within one code value") {
  const CameraIntrinsics k{50, 50, 19.5, 7.5, 40, 16};
  Frame ramp(40, 16);
  for (int v = 0; v < 16; ++v)
    for (int u = 0; u < 40; ++u)
      ramp(u, v) = {from_byte(static_cast<std::uint8_t>(4 * u)), from_byte(128), from_byte(64)};
  const Video frames(2, ramp);
  // 1.3 px shift.
  const TrainingPair pair = synthesize_pair(flat_clip(frames, 5.0f, Trajectory(2, translation(0.13, 0, 0)), k));
  std::size_t covered = 0;
  CHECK(max_masked_error(pair.bundle.proj_views, frames, pair.bundle.proj_masks, &covered) <= kOneCode);
  CHECK(covered > 0u);
}

TEST_CASE("recipes replay bit-exactly for every strategy") {
  const Rgb gain{1.1f, 0.95f, 0.8f}, bias{0.02f, 0.0f, 0.05f};
  for (Strategy s : {Strategy::reproject, Strategy::relight_then_reproject, Strategy::reproject_then_relight,
                     Strategy::frame_repeat, Strategy::clip_pair, Strategy::passthrough}) {
    const SourceClass c = s == Strategy::passthrough ? SourceClass::ai_generated
                          : (s == Strategy::frame_repeat || s == Strategy::clip_pair) ? SourceClass::static_scene
                                                                                      : SourceClass::dynamic_scene;
    ClipInputs clip = scene_clip(c == SourceClass::dynamic_scene, c);
    clip.strategy = s;
    clip.relit_index = 1;
    if (s != Strategy::reproject) clip.external = apply_gain_bias(clip.target, gain, bias);
    for (PropagationMode mode : {PropagationMode::propagate, PropagationMode::faithful}) {
      LightSynOptions opts;
      opts.propagation = mode;
      opts.motion_threshold = 100.0;
      const TrainingPair pair = synthesize_pair(clip, opts);
      const ReplayCheck check = verify_replay(pair.bundle, pair.recipe);
      CHECK_MESSAGE(check.passed, to_string(s), " ", (check.mismatches.empty() ? "" : check.mismatches.front()));
      CHECK(check_bundle(pair.bundle).passed);
      const DegradationRecipe back = DegradationRecipe::from_json(pair.recipe.to_json());
      CHECK(back.to_json() == pair.recipe.to_json());
      CHECK(back.transforms.size() == pair.recipe.transforms.size());
      CHECK(pair.bundle.provenance.degradation == pair.recipe.to_json());
      const ReplayCheck reparsed = verify_replay(pair.bundle, back);
      CHECK(reparsed.passed);
    }
  }
}

TEST_CASE("replay detects a tampered cue") {
  ClipInputs clip = scene_clip(true, SourceClass::dynamic_scene, 3);
  TrainingPair pair = synthesize_pair(clip);
  pair.bundle.proj_views[1][0].r = pair.bundle.proj_views[1][0].r == 0.0f ? 1.0f : 0.0f;
  const ReplayCheck check = verify_replay(pair.bundle, pair.recipe);
  CHECK_FALSE(check.passed);
  REQUIRE(check.mismatches.size() == 1);
  CHECK(check.mismatches.front() == "proj_views");
}

TEST_CASE("recipe transforms match the strategy") {
  ClipInputs clip = scene_clip(true, SourceClass::dynamic_scene, 2);
  clip.external = clip.target;
  clip.strategy = Strategy::relight_then_reproject;
  const DegradationRecipe r = synthesize_pair(clip).recipe;
  REQUIRE(r.transforms.size() == 2);
  CHECK(r.transforms[0].kind == RecordedTransform::Kind::external_relight);
  CHECK(r.transforms[0].view == "target");
  CHECK(r.transforms[1].kind == RecordedTransform::Kind::reproject);
  CHECK(r.transforms[1].poses == clip.trajectory);

  clip.compose_masks = MaskVideo(2, Mask(48, 32, 1.0f));
  clip.compose_background = Frame(48, 32);
  const TrainingPair composed = synthesize_pair(clip);
  CHECK(composed.recipe.transforms.size() == 3);
  CHECK_FALSE(composed.recipe.transforms.back().invertible);
  CHECK(verify_replay(composed.bundle, composed.recipe).passed);
  clip.compose_background.reset();
  CHECK_THROWS_AS(synthesize_pair(clip), ValidationError);
}

TEST_CASE("synthesize_pair errors") {
  ClipInputs clip = scene_clip(true, SourceClass::dynamic_scene, 2);
  clip.strategy = Strategy::relight_then_reproject;
  try {
    synthesize_pair(clip);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("missing relit input") != std::string::npos);
  }
  clip.strategy = Strategy::reproject;
  clip.trajectory[1].rotation *= 1.5;
  try {
    synthesize_pair(clip);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("non-invertible transform") != std::string::npos);
  }
  ClipInputs wrong = scene_clip(true, SourceClass::dynamic_scene, 2);
  wrong.strategy = Strategy::passthrough;
  CHECK_THROWS_AS(synthesize_pair(wrong), ValidationError);
  ClipInputs ai = scene_clip(false, SourceClass::ai_generated, 2);
  CHECK_THROWS_AS(synthesize_pair(ai), ValidationError);
  ClipInputs short_depth = scene_clip(true, SourceClass::dynamic_scene, 2);
  short_depth.depths.pop_back();
  CHECK_THROWS_AS(synthesize_pair(short_depth), DimensionError);
}

TEST_CASE("ai-generated clips swap roles") {
  ClipInputs clip = scene_clip(false, SourceClass::ai_generated, 3);
  clip.external = apply_gain_bias(clip.target, {1, 1, 1}, {0.1f, 0, 0});
  LightSynOptions opts;
  opts.motion_threshold = 100.0;
  const TrainingPair pair = synthesize_pair(clip, opts);
  CHECK(pair.recipe.roles_swapped);
  CHECK(pair.recipe.depth_view == "input");
  CHECK(pair.degraded == quantize8(clip.target));
  CHECK(pair.target == quantize8(*clip.external));
  REQUIRE(pair.motion);
  CHECK(pair.motion->keep);
  CHECK(pair.motion->mean_magnitude > 0.0);
}

TEST_CASE("motion rejection writes only the recipe") {
  ClipInputs clip = scene_clip(false, SourceClass::ai_generated, 3);
  clip.external = clip.target;
  LightSynOptions opts;
  opts.motion_threshold = 0.01;
  const TrainingPair pair = synthesize_pair(clip, opts);
  REQUIRE(pair.motion);
  CHECK_FALSE(pair.motion->keep);
  const fs::path dir = scratch("rejected");
  const PairOutcome out = write_pair(pair, "rejected", dir);
  CHECK_FALSE(out.kept);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  CHECK(names == std::vector<std::string>{"recipe.json"});
  CHECK_FALSE(pair_kept(dir));
  CHECK_FALSE(replay_pair_dir(dir).passed);
  fs::remove_all(dir);
}

TEST_CASE("kept pairs reload and replay from disk") {
  ClipInputs clip = scene_clip(true, SourceClass::dynamic_scene, 3);
  clip.external = apply_gain_bias(clip.target, {1.1f, 0.95f, 0.8f}, {0.02f, 0, 0.05f});
  clip.strategy = Strategy::relight_then_reproject;
  const TrainingPair pair = synthesize_pair(clip);
  const fs::path dir = scratch("kept");
  CHECK(write_pair(pair, "kept", dir).kept);
  CHECK(pair_kept(dir));
  CHECK(read_recipe(dir).to_json() == pair.recipe.to_json());
  CHECK(replay_pair_dir(dir).passed);
  fs::remove_all(dir);
}

TEST_CASE("motion filter") {
  FlowField zero(6, 4);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 6; ++u) zero.set(u, v, 0, 0);
  MotionVerdict z = motion_filter({zero}, 1e-9);
  CHECK(z.keep);
  CHECK(z.mean_magnitude == 0.0);

  FlowField f(6, 4);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 6; ++u) f.set(u, v, 3, 4);
  MotionVerdict r = motion_filter({f, f}, 4.0);
  CHECK(r.mean_magnitude == 5.0);
  CHECK_FALSE(r.keep);
  CHECK(motion_filter({f}, 5.0).keep);
  CHECK(r.samples == 48u);

  std::mt19937_64 rng(3);
  std::normal_distribution<float> n(0.0f, 3.0f);
  std::vector<FlowField> flows;
  long double sum = 0.0L;
  std::size_t count = 0;
  for (int i = 0; i < 5; ++i) {
    FlowField g(17, 11);
    for (int v = 0; v < 11; ++v) {
      for (int u = 0; u < 17; ++u) {
        if ((u + v + i) % 5 == 0) continue;
        g.set(u, v, n(rng), n(rng));
        sum += std::sqrt(static_cast<long double>(g.du(u, v)) * g.du(u, v) +
                         static_cast<long double>(g.dv(u, v)) * g.dv(u, v));
        ++count;
      }
    }
    flows.push_back(g);
  }
  const MotionVerdict m = motion_filter(flows, 2.0);
  CHECK(m.samples == count);
  CHECK(std::abs(m.mean_magnitude - static_cast<double>(sum / count)) <= 1e-9);
  CHECK_THROWS_AS(motion_filter({}, 1.0), ValidationError);
}

TEST_CASE("depth noise") {
  std::mt19937_64 rng(4);
  const DepthMap d = oracle::random_depth(rng, 64, 48, 0.2);
  CHECK(inject_depth_noise(d, 0.0, 7).values().size() == d.size());
  const DepthMap same = inject_depth_noise(d, 0.0, 7);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (is_valid_depth(d[i])) CHECK(same[i] == d[i]);
  }
  CHECK(oracle::same_bits(inject_depth_noise(d, 0.03, 9), inject_depth_noise(d, 0.03, 9)));
  CHECK_FALSE(oracle::same_bits(inject_depth_noise(d, 0.03, 9), inject_depth_noise(d, 0.03, 10)));
  CHECK(oracle::same_bits(inject_depth_noise(d, 0.0025, 9, NoiseScale::variance), inject_depth_noise(d, 0.05, 9)));
  const DepthMap noisy = inject_depth_noise(d, 0.05, 11);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!is_valid_depth(d[i])) {
      const bool both_nan = std::isnan(d[i]) && std::isnan(noisy[i]);
      CHECK((both_nan || noisy[i] == d[i]));
    }
  }
  CHECK_THROWS_AS(inject_depth_noise(d, -0.01, 1), ValidationError);
  // Large rates push some depths below zero; those become invalid.
  const DepthMap wild = inject_depth_noise(DepthMap(100, 100, 1.0f), 2.0, 5);
  int dropped = 0;
  for (float x : wild.values()) {
    CHECK((x == 0.0f || x > 0.0f));
    dropped += x == 0.0f;
  }
  CHECK(dropped > 0);
}

TEST_CASE("depth noise sample std") {
  const DepthMap ones(500, 200, 1.0f);
  const DepthMap noisy = inject_depth_noise(ones, 0.05, 2024);
  double mean = 0.0;
  for (float x : noisy.values()) mean += x - 1.0;
  mean /= static_cast<double>(noisy.size());
  double var = 0.0;
  for (float x : noisy.values()) var += (x - 1.0 - mean) * (x - 1.0 - mean);
  const double sd = std::sqrt(var / static_cast<double>(noisy.size() - 1));
  CHECK(sd >= 0.0495);
  CHECK(sd <= 0.0505);
}

TEST_CASE("strategy names and defaults") {
  for (Strategy s : {Strategy::frame_repeat, Strategy::clip_pair, Strategy::reproject, Strategy::relight_then_reproject,
                     Strategy::reproject_then_relight, Strategy::passthrough})
    CHECK(strategy_from_string(to_string(s)) == s);
  for (SourceClass c : {SourceClass::static_scene, SourceClass::dynamic_scene, SourceClass::ai_generated})
    CHECK(source_class_from_string(to_string(c)) == c);
  CHECK(default_strategy(SourceClass::ai_generated, true) == Strategy::passthrough);
  CHECK_THROWS_AS(DegradationRecipe::from_json("{"), ParseError);
  CHECK_THROWS_AS(DegradationRecipe::from_json(R"({"transforms":[{"kind":"spin"}]})"), ParseError);
}
