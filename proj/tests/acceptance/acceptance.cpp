// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failing criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "camlight/conditioning.hpp"
#include "camlight/dataset.hpp"
#include "camlight/io.hpp"
#include "camlight/lightsyn.hpp"
#include "camlight/metrics.hpp"
#include "camlight/synthetic.hpp"
#include "oracles/oracles.hpp"

using namespace camlight;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kRoundTripSeconds = 5.0;
constexpr double kFlowResidualPx = 0.51;
constexpr double kFlowOraclePx = 1e-5;
constexpr double kFidelity = 1.0 / 255.0;
constexpr double kFloatSlack = 1e-6;  // float32 storage of k/255 codes
constexpr double kNoiseStdRelative = 0.01;
constexpr std::size_t kNoiseSamples = 1000000;
constexpr double kReductionTol = 1e-9;
constexpr double kThroughputSeconds = 10.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CameraIntrinsics random_intrinsics(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> f(0.5, 1.5);
  return {f(rng) * w, f(rng) * w, (w - 1) / 2.0, (h - 1) / 2.0, w, h};
}

Outcome round_trip() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(1, 64), frames(1, 8);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, pixels = 0;
  for (int clip = 0; clip < 50; ++clip) {
    const int w = size(rng), h = size(rng), f = frames(rng);
    const CameraIntrinsics k = random_intrinsics(rng, w, h);
    Video video;
    std::vector<DepthMap> depths;
    for (int i = 0; i < f; ++i) {
      video.push_back(oracle::random_frame(rng, w, h));
      depths.push_back(oracle::random_depth(rng, w, h, 0.25));
    }
    const CueStreams cues = build_source_cues(video, depths, k, Trajectory(static_cast<std::size_t>(f)));
    for (int i = 0; i < f; ++i) {
      for (std::size_t p = 0; p < video[i].size(); ++p) {
        const bool valid = is_valid_depth(depths[i][p]);
        ++pixels;
        if (cues.masks[i][p] != (valid ? 1.0f : 0.0f)) ++mismatches;
        if (valid && !(cues.views[i][p] == video[i][p])) ++mismatches;
      }
    }
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < kRoundTripSeconds,
          fmt("50 clips, %zu pixels, %zu mismatches, %.3f s (limit %.1f s)", pixels, mismatches, s,
              kRoundTripSeconds)};
}

Outcome zbuffer() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> size(4, 48), count(0, 256), radius(0, 2), coin(0, 3);
  std::uniform_real_distribution<double> xy(-2.0, 2.0), z(-0.5, 6.0);
  int failing = 0;
  for (int scene = 0; scene < 200; ++scene) {
    const int w = size(rng), h = size(rng);
    const CameraIntrinsics k = random_intrinsics(rng, w, h);
    PointCloud cloud;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      CloudPoint p;
      // Some points share a depth so the index tie-break matters.
      p.position = {xy(rng), xy(rng), coin(rng) == 0 ? 3.0 : z(rng)};
      p.color = {float(xy(rng)), float(z(rng)), 0.5f};
      p.source_index = static_cast<std::uint32_t>(i);
      cloud.points.push_back(p);
    }
    const CameraPose pose = oracle::random_small_pose(rng, 0.2, 0.5);
    RenderOptions opts;
    opts.splat_radius = radius(rng);
    opts.workers = 1 + scene % 3;
    const RenderedView got = project(cloud, pose, k, opts);
    const RenderedView want = oracle::brute_force_render(cloud, pose, k, opts.splat_radius);
    if (!(got.image == want.image && got.mask == want.mask && got.depth_buffer == want.depth_buffer)) ++failing;
  }
  return {failing == 0, fmt("200 scenes, %d differ from the exhaustive renderer", failing)};
}

Outcome flow_consistency() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> size(16, 64);
  double worst_residual = 0.0, worst_oracle = 0.0;
  std::size_t checked = 0, oracle_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = size(rng), h = size(rng);
    const CameraIntrinsics k = random_intrinsics(rng, w, h);
    const DepthMap a = trial % 2 ? oracle::smooth_depth(rng, w, h) : oracle::random_depth(rng, w, h, 0.1, 2.0f, 8.0f);
    const CameraPose pose = oracle::random_small_pose(rng, 0.05, 0.2);
    const FlowField fwd = derive_flow(a, pose, k);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const auto want = oracle::pointwise_flow(a, pose, k, u, v);
        if (want.has_value() != fwd.is_valid(u, v)) {
          ++oracle_mismatch;
          continue;
        }
        if (!want) continue;
        worst_oracle = std::max({worst_oracle, std::abs(fwd.du(u, v) - want->x()), std::abs(fwd.dv(u, v) - want->y())});
      }
    }
    // Non-occluded: the depth test passes at every footprint corner in the
    // other view and the bilinear footprint lies inside it.
    const DepthMap b = render_depth(a, pose, k);
    const FlowField bwd = derive_flow(b, pose.inverse(), k);
    const Mask visible = depth_consistency(a, pose, k, b, 0.05);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (visible(u, v) == 0.0f || !fwd.is_valid(u, v)) continue;
        const auto back = sample_flow(bwd, u + fwd.du(u, v), v + fwd.dv(u, v));
        if (!back) continue;
        worst_residual = std::max(worst_residual, std::hypot(fwd.du(u, v) + back->x(), fwd.dv(u, v) + back->y()));
        ++checked;
      }
    }
  }
  const bool pass = worst_residual <= kFlowResidualPx && worst_oracle <= kFlowOraclePx && oracle_mismatch == 0;
  return {pass, fmt("100 instances, %zu pixels, max residual %.4f px (limit %.2f), max oracle diff %.2e px (limit "
                    "%.0e), %zu validity mismatches",
                    checked, worst_residual, kFlowResidualPx, worst_oracle, kFlowOraclePx, oracle_mismatch)};
}

double masked_error(const Frame& a, const Frame& b, const Mask& m, std::size_t& covered) {
  double worst = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    if (m[p] == 0.0f) continue;
    ++covered;
    worst = std::max({worst, std::abs(double(a[p].r) - b[p].r), std::abs(double(a[p].g) - b[p].g),
                      std::abs(double(a[p].b) - b[p].b)});
  }
  return worst;
}

Outcome lightsyn_replay(const fs::path& manifest) {
  const fs::path base = manifest.parent_path();
  const auto records = parse_manifest(read_text(manifest));
  const PipelineConfig config;
  const fs::path out_root = fs::temp_directory_path() / "camlight-acceptance-pairs";
  fs::remove_all(out_root);
  int replayed = 0, failed = 0;
  double worst = 0.0;
  std::size_t covered = 0;
  std::ostringstream notes;
  for (const ManifestRecord& r : records) {
    const ClipInputs clip = load_clip(r, base, config);
    const TrainingPair pair = synthesize_pair(clip, lightsyn_options(config));
    const ReplayCheck memory = verify_replay(pair.bundle, pair.recipe);
    const PairOutcome written = write_pair(pair, r.clip_id, out_root / r.clip_id);
    if (!written.kept) {
      notes << " " << r.clip_id << " rejected by motion filter;";
      ++failed;
      continue;
    }
    const ReplayCheck disk = replay_pair_dir(out_root / r.clip_id);
    if (memory.passed && disk.passed) ++replayed;
    else ++failed;
    // The target's relit frame carried to the input view and back.
    const auto ri = static_cast<std::size_t>(pair.recipe.relit_index);
    worst = std::max(worst, masked_error(pair.bundle.relit_proj[ri], pair.target[ri], pair.bundle.relit_masks[ri],
                                         covered));
    // Warped input frames mapped back onto the content they were warped from.
    if (pair.recipe.strategy == Strategy::relight_then_reproject || pair.recipe.strategy == Strategy::reproject) {
      const Video source = pair.recipe.strategy == Strategy::reproject ? pair.target : quantize8(*clip.external);
      for (std::size_t i = 0; i < source.size(); ++i) {
        worst = std::max(worst, masked_error(pair.bundle.proj_views[i], source[i], pair.bundle.proj_masks[i],
                                             covered));
      }
    }
  }
  fs::remove_all(out_root);
  const bool pass = failed == 0 && replayed == static_cast<int>(records.size()) && records.size() == 3 &&
                    worst <= kFidelity + kFloatSlack && covered > 0;
  return {pass, fmt("%d/%zu pairs replay bit-exactly (memory and disk), warp-back max error %.5f over %zu px (limit "
                    "%.5f)%s",
                    replayed, records.size(), worst, covered, kFidelity, notes.str().c_str())};
}

Outcome soft_masks() {
  std::mt19937_64 rng(404);
  CueStreams geometric;
  for (int i = 0; i < 49; ++i) {
    geometric.views.push_back(oracle::random_frame(rng, 672 / 8, 384 / 8));
    geometric.masks.emplace_back(672 / 8, 384 / 8, 1.0f);
  }
  const Frame payload = oracle::random_frame(rng, 672 / 8, 384 / 8);
  std::size_t bad = 0, checked = 0;
  for (const auto& [m, alpha] : {std::pair{Modality::ref, 0.25f}, std::pair{Modality::hdr, 0.50f}}) {
    const CueStreams out = compose_modality({m, payload, std::nullopt}, geometric);
    for (const Mask& mask : out.masks) {
      for (float x : mask.values()) {
        ++checked;
        if (x != alpha) ++bad;
      }
    }
    if (out.masks.size() != geometric.masks.size()) ++bad;
  }
  return {bad == 0, fmt("ref 0.25 / hdr 0.50 over %zu mask values, %zu off", checked, bad)};
}

Outcome depth_noise() {
  // Fixed scene and camera move; error is the mean endpoint distance between
  // flows from noisy and exact depth.
  const CameraIntrinsics k = CameraIntrinsics::default_for(160, 96);
  const SceneRender scene = demo_scene(false).render(CameraPose::identity(), k);
  CameraPose move;
  move.translation = {0.2, 0.05, 0.1};
  move.rotation = Eigen::AngleAxisd(0.02, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const FlowField exact = derive_flow(scene.depth, move, k);
  const double rates[] = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
  std::string errors;
  double previous = -1.0;
  bool monotone = true;
  for (double rate : rates) {
    const FlowField noisy = derive_flow(inject_depth_noise(scene.depth, rate, 7), move, k);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < exact.du.size(); ++i) {
      if (!exact.is_valid(i) || !noisy.is_valid(i)) continue;
      sum += std::hypot(double(noisy.du[i]) - exact.du[i], double(noisy.dv[i]) - exact.dv[i]);
      ++n;
    }
    const double mean = sum / static_cast<double>(n);
    monotone = monotone && mean >= previous;
    previous = mean;
    errors += fmt("%s%.4f", errors.empty() ? "" : " ", mean);
  }
  // Sample std of relative noise at each swept rate.
  bool std_ok = true;
  std::string stds;
  const DepthMap ones(1000, static_cast<int>(kNoiseSamples / 1000), 1.0f);
  for (double rate : rates) {
    if (rate == 0.0) continue;
    const DepthMap d = inject_depth_noise(ones, rate, 99);
    double mean = 0.0;
    for (float x : d.values()) mean += double(x) - 1.0;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (float x : d.values()) var += (double(x) - 1.0 - mean) * (double(x) - 1.0 - mean);
    const double sd = std::sqrt(var / static_cast<double>(d.size() - 1));
    std_ok = std_ok && std::abs(sd - rate) <= kNoiseStdRelative * rate;
    stds += fmt("%s%.5f", stds.empty() ? "" : " ", sd);
  }
  return {monotone && std_ok, fmt("mean reprojection error [%s] px %s; sample std [%s] (within %.0f%% of rate)",
                                  errors.c_str(), monotone ? "non-decreasing" : "NOT monotone", stds.c_str(),
                                  100 * kNoiseStdRelative)};
}

Outcome metrics_oracles() {
  std::mt19937_64 rng(505);
  double psnr_err = 0.0, ssim_err = 0.0, epe_err = 0.0, cd_err = 0.0;
  bool nn_exact = true;
  for (int i = 0; i < 10; ++i) {
    const Frame a = oracle::random_frame(rng, 24 + i, 20);
    Frame b = a;
    std::normal_distribution<float> noise(0.0f, 0.05f);
    for (std::size_t p = 0; p < b.size(); ++p) b[p].r = std::clamp(b[p].r + noise(rng), 0.0f, 1.0f);
    psnr_err = std::max(psnr_err, std::abs(psnr(a, b) - oracle::psnr(a, b)));
    ssim_err = std::max(ssim_err, std::abs(ssim(a, b) - oracle::ssim(a, b)));
  }
  const double closed = (2 * 0.125 + 1e-4) / (0.25 + 0.0625 + 1e-4);
  const double constant_err = std::abs(ssim(Frame(16, 16, {0.5f, 0.5f, 0.5f}), Frame(16, 16, {0.25f, 0.25f, 0.25f})) -
                                       closed);
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_real_distribution<float> u(-4.0f, 4.0f);
    std::vector<FlowField> p, r;
    long double sum = 0.0L;
    std::size_t n = 0;
    for (int f = 0; f < 3; ++f) {
      FlowField fp(20, 15), fr(20, 15);
      for (int v = 0; v < 15; ++v) {
        for (int x = 0; x < 20; ++x) {
          fp.set(x, v, u(rng), u(rng));
          if ((x * 7 + v + f) % 6 == 0) continue;
          fr.set(x, v, u(rng), u(rng));
          sum += std::hypot(static_cast<long double>(fp.du(x, v)) - fr.du(x, v),
                            static_cast<long double>(fp.dv(x, v)) - fr.dv(x, v));
          ++n;
        }
      }
      p.push_back(fp);
      r.push_back(fr);
    }
    epe_err = std::max(epe_err, std::abs(motion_preservation(p, r) - static_cast<double>(sum / n)));
  }
  for (std::size_t n : {10u, 1000u, 10000u}) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Points a(n), b(n / 2 + 1);
    for (auto& x : a) x = {u(rng), u(rng), u(rng)};
    for (auto& x : b) x = {u(rng), u(rng), 2 * u(rng)};
    nn_exact = nn_exact && nearest_squared(a, b, NearestBackend::kd_tree) ==
                               nearest_squared(a, b, NearestBackend::brute_force);
    if (n <= 1000) {
      const ChamferResult c = chamfer(a, b);
      cd_err = std::max({cd_err, std::abs(c.a_to_b - oracle::mean_nn_distance(a, b)),
                         std::abs(c.b_to_a - oracle::mean_nn_distance(b, a))});
    }
  }
  const bool pass = psnr_err <= kReductionTol && ssim_err <= kReductionTol && epe_err <= kReductionTol &&
                    cd_err <= kReductionTol && constant_err <= kReductionTol && nn_exact;
  return {pass, fmt("PSNR %.1e, SSIM %.1e, EPE %.1e, Chamfer %.1e, constant SSIM %.1e (limit %.0e); kd-tree NN %s "
                    "up to 1e4 points",
                    psnr_err, ssim_err, epe_err, cd_err, constant_err, kReductionTol,
                    nn_exact ? "bit-exact" : "DIFFERS")};
}

Outcome throughput() {
  const int w = 672, h = 384, f = 49;
  const CameraIntrinsics k = CameraIntrinsics::default_for(w, h);
  const SyntheticScene scene = demo_scene(true);
  Video video;
  std::vector<DepthMap> depths;
  for (int i = 0; i < f; ++i) {
    SceneRender r = scene.render(CameraPose::identity(), k, i);
    video.push_back(std::move(r.image));
    depths.push_back(std::move(r.depth));
  }
  const Trajectory traj = expand(parse_trajectory(R"({"preset":"orbit","angle_deg":15})"), f);
  const auto relit = SparseRelitVideo::from_frame(apply_gain_bias(video[0], {1.1f, 0.95f, 0.8f}, {0.02f, 0, 0.05f}),
                                                  0, f);
  ConditioningOptions opts;
  opts.workers = 0;
  const auto t0 = Clock::now();
  const ConditioningBundle b = assemble_bundle(video, depths, k, traj, relit, {}, opts);
  const double s = seconds_since(t0);
  const bool ok = check_bundle(b).passed;
  return {ok && s <= kThroughputSeconds,
          fmt("49 x %dx%d, six streams in %.2f s on %u hardware threads (limit %.1f s)", h, w, s,
              std::thread::hardware_concurrency(), kThroughputSeconds)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path manifest = argc > 1 ? fs::path(argv[1]) : fs::path("data/demo/manifest.jsonl");
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"round-trip identity", round_trip},
      {"z-buffer oracle", zbuffer},
      {"flow consistency", flow_consistency},
      {"light-syn replay", [&] { return lightsyn_replay(manifest); }},
      {"soft-mask constants", soft_masks},
      {"depth-noise trend", depth_noise},
      {"metrics oracles", metrics_oracles},
      {"throughput", throughput},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
