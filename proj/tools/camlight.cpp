// camlight command-line front end. Every subcommand prints one JSON summary
// line on stdout; exit code 0 = ok, 1 = validation failure, 2 = I/O or parse.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "camlight/bundle.hpp"
#include "camlight/conditioning.hpp"
#include "camlight/config.hpp"
#include "camlight/dataset.hpp"
#include "camlight/geometry.hpp"
#include "camlight/io.hpp"
#include "camlight/lightsyn.hpp"
#include "camlight/metrics.hpp"
#include "camlight/synthetic.hpp"
#include "camlight/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace camlight;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Shared pipeline flags. Each one overrides the config file only when given.
struct ConfigFlags {
  std::string config_path;
  PipelineConfig defaults;
  std::string modality = "projected";
  std::string propagation = "propagate";
  std::string noise_scale = "std";
  double fx = 0, fy = 0, cx = 0, cy = 0;
  float alpha = 0.0f;
  CLI::App* app = nullptr;

  void attach(CLI::App& sub) {
    app = &sub;
    sub.add_option("--config", config_path, "JSON config file (flags override it)");
    sub.add_option("--width", defaults.width, "Frame width")->capture_default_str();
    sub.add_option("--height", defaults.height, "Frame height")->capture_default_str();
    sub.add_option("--frame-count", defaults.frame_count, "Frames per clip")->capture_default_str();
    sub.add_option("--fx", fx, "Focal length x (default 0.58*width)");
    sub.add_option("--fy", fy, "Focal length y (default 0.58*width)");
    sub.add_option("--cx", cx, "Principal point x (default width/2)");
    sub.add_option("--cy", cy, "Principal point y (default height/2)");
    sub.add_option("--trajectory", defaults.trajectory_path, "Trajectory JSON (preset or keyframes)");
    sub.add_option("--modality", modality, "projected | ref | hdr")->capture_default_str();
    sub.add_option("--alpha", alpha, "Soft-mask override (default 0.25 ref, 0.50 hdr)");
    sub.add_option("--propagation", propagation, "propagate | faithful")->capture_default_str();
    sub.add_option("--tau", defaults.tau, "Forward-backward threshold in pixels")->capture_default_str();
    sub.add_option("--depth-tolerance", defaults.depth_tolerance, "Relative depth test tolerance")
        ->capture_default_str();
    sub.add_option("--splat-radius", defaults.splat_radius, "Splat footprint radius")->capture_default_str();
    sub.add_option("--noise-rate", defaults.noise_rate, "Depth noise rate")->capture_default_str();
    sub.add_option("--seed", defaults.noise_seed, "Noise seed")->capture_default_str();
    sub.add_option("--noise-scale", noise_scale, "std | variance")->capture_default_str();
    sub.add_option("--motion-threshold", defaults.motion_threshold, "Motion filter threshold in pixels")
        ->capture_default_str();
    sub.add_option("--workers", defaults.workers, "Worker threads (0 = all cores)")->capture_default_str();
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (given("--width")) c.width = defaults.width;
    if (given("--height")) c.height = defaults.height;
    if (given("--frame-count")) c.frame_count = defaults.frame_count;
    if (given("--fx")) c.fx = fx;
    if (given("--fy")) c.fy = fy;
    if (given("--cx")) c.cx = cx;
    if (given("--cy")) c.cy = cy;
    if (given("--trajectory")) {
      c.trajectory_path = defaults.trajectory_path;
      c.trajectory_inline.clear();
    }
    if (given("--modality")) c.modality = modality_from_string(modality);
    if (given("--alpha")) c.alpha = alpha;
    if (given("--propagation")) c.propagation = propagation_from_string(propagation);
    if (given("--tau")) c.tau = defaults.tau;
    if (given("--depth-tolerance")) c.depth_tolerance = defaults.depth_tolerance;
    if (given("--splat-radius")) c.splat_radius = defaults.splat_radius;
    if (given("--noise-rate")) c.noise_rate = defaults.noise_rate;
    if (given("--seed")) c.noise_seed = defaults.noise_seed;
    if (given("--noise-scale")) c.noise_scale = noise_scale_from_string(noise_scale);
    if (given("--motion-threshold")) c.motion_threshold = defaults.motion_threshold;
    if (given("--workers")) c.workers = defaults.workers;
    c.validate();
    return c;
  }
};

Trajectory load_trajectory(const PipelineConfig& c, int frames, bool identity_if_missing) {
  std::string text;
  if (!c.trajectory_inline.empty()) {
    text = c.trajectory_inline;
  } else if (!c.trajectory_path.empty()) {
    text = read_text(c.trajectory_path);
  } else if (identity_if_missing) {
    return Trajectory(static_cast<std::size_t>(frames));
  } else {
    throw ValidationError("a trajectory is required (--trajectory or trajectory/trajectory_spec in --config)");
  }
  return expand(parse_trajectory(text), frames);
}

json bundle_summary(const ConditioningBundle& b) {
  return {{"frames", b.frame_count()}, {"width", b.width()}, {"height", b.height()},
          {"modality", std::string(to_string(b.modality))}};
}

// ---- condition --------------------------------------------------------------

struct ConditionArgs {
  ConfigFlags cfg;
  std::string frames_dir, depth_dir, target_dir, relit_path, payload_path, masks_dir, background_path, out;
  std::string mode = "joint";
  int relit_index = 0;
};

json run_condition(const ConditionArgs& a) {
  const PipelineConfig c = a.cfg.resolve();
  Video source = read_video_dir(a.frames_dir);
  const std::vector<DepthMap> depths = read_depth_dir(a.depth_dir);
  const int f = static_cast<int>(source.size());
  const CameraIntrinsics k = c.intrinsics_for(source.front().width(), source.front().height());
  if (a.mode != "joint" && a.mode != "camera-only" && a.mode != "relight-only" && a.mode != "background") {
    throw ValidationError("unknown mode \"" + a.mode + "\" (joint, camera-only, relight-only, background)");
  }
  if (a.relit_index < 0 || a.relit_index >= f) throw ValidationError("relit index out of range");

  if (a.mode == "background") {
    if (a.masks_dir.empty() || a.background_path.empty()) {
      throw ValidationError("background mode needs --masks and --background");
    }
    source = compose_background(source, read_mask_dir(a.masks_dir), read_frame(a.background_path));
  }
  const bool relight_only = a.mode == "relight-only";
  const Trajectory traj = load_trajectory(c, f, relight_only);
  Frame relit_frame;
  if (a.mode == "camera-only") {
    relit_frame = source[static_cast<std::size_t>(a.relit_index)];
  } else {
    if (a.relit_path.empty()) throw ValidationError("mode " + a.mode + " needs --relit (the relit frame)");
    relit_frame = read_frame(a.relit_path);
  }
  const SparseRelitVideo relit = SparseRelitVideo::from_frame(relit_frame, a.relit_index, f);

  IlluminationCondition cond;
  cond.modality = c.modality;
  cond.alpha_override = c.alpha;
  if (c.modality != Modality::projected) {
    if (a.payload_path.empty()) throw ValidationError("modality needs --payload (the conditioning image)");
    cond.payload = read_frame(a.payload_path);
  }
  ConditioningOptions opts;
  opts.workers = c.workers;
  opts.propagation = c.propagation;
  opts.render.splat_radius = c.splat_radius;
  ConditioningBundle b = assemble_bundle(source, depths, k, relight_only ? Trajectory(traj.size()) : traj, relit,
                                         cond, opts);
  if (relight_only) b = relighting_mode_rewrite(std::move(b));
  if (!a.target_dir.empty()) b.target = read_video_dir(a.target_dir);
  b.provenance.depth_source = a.depth_dir;
  b.provenance.relit_source = a.mode == "camera-only" ? "source frame" : a.relit_path;
  b.provenance.mode = a.mode;
  const BundleCheck check = check_bundle(b);
  write_bundle(b, a.out);
  json s = bundle_summary(b);
  s["out"] = a.out;
  s["mode"] = a.mode;
  s["check"] = check.passed;
  if (!check.passed) s["failures"] = check.failures;
  return s;
}

// ---- synth-pairs --------------------------------------------------------------

struct SynthArgs {
  ConfigFlags cfg;
  std::string manifest, output_root;
  bool verify = false;
};

json run_synth(const SynthArgs& a) {
  const PipelineConfig c = a.cfg.resolve();
  const fs::path base = fs::path(a.manifest).parent_path();
  const fs::path out_root = a.output_root.empty() ? base : fs::path(a.output_root);
  const std::vector<ManifestRecord> records = parse_manifest(read_text(a.manifest));
  json pairs = json::array();
  int kept = 0;
  bool all_replayed = true;
  for (const ManifestRecord& r : records) {
    const ClipInputs clip = load_clip(r, base, c);
    const TrainingPair pair = synthesize_pair(clip, lightsyn_options(c));
    const fs::path out = fs::path(r.output_dir).is_absolute() ? fs::path(r.output_dir) : out_root / r.output_dir;
    const PairOutcome o = write_pair(pair, r.clip_id, out);
    json p{{"clip_id", r.clip_id}, {"dir", out.string()}, {"kept", o.kept},
           {"transforms", pair.recipe.transforms.size()}};
    if (o.motion) p["mean_motion"] = o.motion->mean_magnitude;
    if (o.kept) {
      ++kept;
      if (a.verify) {
        const ReplayCheck check = replay_pair_dir(out, c.workers);
        p["replay"] = check.passed;
        all_replayed = all_replayed && check.passed;
      }
    }
    pairs.push_back(std::move(p));
  }
  json s{{"pairs", records.size()}, {"kept", kept}, {"results", pairs}};
  if (a.verify) s["replay_passed"] = all_replayed;
  if (a.verify && !all_replayed) throw ValidationError("replay mismatch: " + s.dump());
  return s;
}

// ---- render ----------------------------------------------------------------

struct RenderArgs {
  ConfigFlags cfg;
  std::string frame_path, depth_path, out;
};

json run_render(const RenderArgs& a) {
  const PipelineConfig c = a.cfg.resolve();
  const Frame frame = read_frame(a.frame_path);
  const DepthMap depth = read_depth_pfm(a.depth_path);
  const CameraIntrinsics k = c.intrinsics_for(frame.width(), frame.height());
  const Trajectory traj = load_trajectory(c, c.frame_count, false);
  const PointCloud cloud = backproject(frame, depth, k);
  RenderOptions opts;
  opts.splat_radius = c.splat_radius;
  opts.workers = c.workers;
  fs::create_directories(fs::path(a.out) / "views");
  fs::create_directories(fs::path(a.out) / "masks");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const RenderedView v = project(cloud, traj[i], k, opts);
    write_frame(fs::path(a.out) / "views" / frame_name(i, ".png"), v.image);
    write_mask(fs::path(a.out) / "masks" / frame_name(i, ".png"), v.mask);
  }
  return {{"points", cloud.size()}, {"frames", traj.size()}, {"out", a.out}};
}

// ---- metrics ---------------------------------------------------------------

struct MetricsArgs {
  ConfigFlags cfg;
  std::string a, b, flows_a, flows_b, depth_a, depth_b, json_out, table_out, name;
  std::string stream = "source";
};

struct EvalInput {
  Video video;
  std::vector<DepthMap> depths;
  std::optional<CameraIntrinsics> intrinsics;
};

EvalInput load_eval(const std::string& dir, const std::string& depth_dir, const std::string& stream) {
  EvalInput in;
  if (fs::exists(fs::path(dir) / "bundle.json")) {
    ConditioningBundle b = read_bundle(dir);
    if (stream == "source") {
      in.video = std::move(b.source);
    } else if (stream == "target" && b.target) {
      in.video = std::move(*b.target);
    } else if (stream == "proj_views") {
      in.video = std::move(b.proj_views);
    } else if (stream == "relit_proj") {
      in.video = std::move(b.relit_proj);
    } else {
      throw ValidationError("bundle has no stream \"" + stream + "\"");
    }
    in.depths = std::move(b.depths);
    in.intrinsics = b.intrinsics;
  } else {
    in.video = read_video_dir(dir);
  }
  if (!depth_dir.empty()) in.depths = read_depth_dir(depth_dir);
  return in;
}

json run_metrics(const MetricsArgs& a) {
  const PipelineConfig c = a.cfg.resolve();
  const EvalInput ea = load_eval(a.a, a.depth_a, a.stream);
  const EvalInput eb = load_eval(a.b, a.depth_b, a.stream);
  VideoMetrics m;
  m.name = a.name.empty() ? fs::path(a.a).filename().string() : a.name;
  m.psnr = psnr(ea.video, eb.video);
  m.ssim = ssim(ea.video, eb.video);
  if (!a.flows_a.empty() || !a.flows_b.empty()) {
    if (a.flows_a.empty() || a.flows_b.empty()) throw ValidationError("--flows-a and --flows-b go together");
    m.motion_preservation = motion_preservation(read_flow_dir(a.flows_a), read_flow_dir(a.flows_b));
  }
  if (!ea.depths.empty() && !eb.depths.empty()) {
    if (ea.depths.size() != eb.depths.size()) throw DimensionError("depth sequences differ in length");
    for (std::size_t i = 0; i < ea.depths.size(); ++i) {
      const CameraIntrinsics ka = ea.intrinsics.value_or(c.intrinsics_for(ea.depths[i].width(), ea.depths[i].height()));
      const CameraIntrinsics kb = eb.intrinsics.value_or(c.intrinsics_for(eb.depths[i].width(), eb.depths[i].height()));
      const ChamferResult cd = chamfer(backproject(ea.depths[i], ka), backproject(eb.depths[i], kb),
                                       NearestBackend::kd_tree, c.workers);
      m.chamfer_per_frame.push_back(cd.symmetric);
    }
  }
  MetricReport report;
  report.videos.push_back(m);
  if (!a.json_out.empty()) write_text(a.json_out, report.to_json() + "\n");
  if (!a.table_out.empty()) write_text(a.table_out, report.to_table());
  json doc = json::parse(report.to_json());
  return doc["aggregate"];
}

// ---- noise -----------------------------------------------------------------

struct NoiseArgs {
  ConfigFlags cfg;
  std::string depth_dir, out;
};

json run_noise(const NoiseArgs& a) {
  const PipelineConfig c = a.cfg.resolve();
  const std::vector<fs::path> files = list_files(a.depth_dir, {".pfm"});
  if (files.empty()) throw IoError(a.depth_dir + ": no .pfm depth maps");
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < files.size(); ++i) {
    // One stream per file so the order of processing never matters.
    const DepthMap noisy = inject_depth_noise(read_depth_pfm(files[i]), c.noise_rate, c.noise_seed + i, c.noise_scale);
    write_depth_pfm(fs::path(a.out) / files[i].filename(), noisy);
  }
  return {{"files", files.size()}, {"rate", c.noise_rate}, {"seed", c.noise_seed},
          {"scale", std::string(to_string(c.noise_scale))}, {"out", a.out}};
}

// ---- validate --------------------------------------------------------------

struct ValidateArgs {
  std::string trajectory, bundle, pair;
  int frames = 0;
  int workers = 0;
};

json run_validate(const ValidateArgs& a, bool& passed) {
  const int given = !a.trajectory.empty() + !a.bundle.empty() + !a.pair.empty();
  if (given != 1) throw ValidationError("validate needs exactly one of --trajectory, --bundle, --pair");
  json s;
  if (!a.trajectory.empty()) {
    const TrajectorySpec spec = parse_trajectory(read_text(a.trajectory));
    const int frames = a.frames > 0 ? a.frames : natural_frame_count(spec);
    const TrajectoryReport r = validate(expand(spec, frames));
    double worst_o = 0.0;
    double worst_d = 0.0;
    for (const PoseResidual& p : r.frames) {
      worst_o = std::max(worst_o, p.orthonormality);
      worst_d = std::max(worst_d, p.determinant);
    }
    s = {{"kind", "trajectory"}, {"frames", frames}, {"max_orthonormality", worst_o}, {"max_determinant", worst_d},
         {"failing_frames", r.failing_frames()}};
    passed = r.passed;
  } else if (!a.bundle.empty()) {
    const ConditioningBundle b = read_bundle(a.bundle);
    const BundleCheck check = check_bundle(b);
    s = bundle_summary(b);
    s["kind"] = "bundle";
    s["failures"] = check.failures;
    passed = check.passed;
  } else {
    const ReplayCheck check = replay_pair_dir(a.pair, a.workers);
    s = {{"kind", "pair"}, {"mismatches", check.mismatches}};
    passed = check.passed;
  }
  s["passed"] = passed;
  return s;
}

void print_summary(const std::string& command, json body, int code, const std::string& error = "") {
  body["command"] = command;
  body["status"] = code == kExitOk ? "ok" : (code == kExitValidation ? "invalid" : "error");
  body["exit_code"] = code;
  if (!error.empty()) body["error"] = error;
  std::cout << body.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camlight: geometry conditioning, training-pair synthesis and metrics for relighting video data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "camlight 1.0.0");

  ConditionArgs cond;
  CLI::App* c_cmd = app.add_subcommand("condition", "Frames + depths + trajectory -> conditioning bundle");
  cond.cfg.attach(*c_cmd);
  c_cmd->add_option("--frames-dir", cond.frames_dir, "Source frame directory")->required();
  c_cmd->add_option("--depth-dir", cond.depth_dir, "Depth PFM directory")->required();
  c_cmd->add_option("--target-dir", cond.target_dir, "Optional target frame directory");
  c_cmd->add_option("--relit", cond.relit_path, "Relit frame image");
  c_cmd->add_option("--relit-index", cond.relit_index, "Index of the relit frame")->capture_default_str();
  c_cmd->add_option("--payload", cond.payload_path, "Reference/HDR conditioning image for ref/hdr");
  c_cmd->add_option("--masks", cond.masks_dir, "Foreground mask directory (background mode)");
  c_cmd->add_option("--background", cond.background_path, "Background image (background mode)");
  c_cmd->add_option("--mode", cond.mode, "joint | camera-only | relight-only | background")->capture_default_str();
  c_cmd->add_option("--out", cond.out, "Output bundle directory")->required();

  SynthArgs synth;
  CLI::App* s_cmd = app.add_subcommand("synth-pairs", "Dataset manifest -> training pair directories");
  synth.cfg.attach(*s_cmd);
  s_cmd->add_option("--manifest", synth.manifest, "Newline-delimited JSON manifest")->required();
  s_cmd->add_option("--output-root", synth.output_root, "Base for relative output_dir (default: manifest dir)");
  s_cmd->add_flag("--verify", synth.verify, "Replay every written pair and compare cues");

  RenderArgs render;
  CLI::App* r_cmd = app.add_subcommand("render", "Preview renders of one frame's point cloud along a trajectory");
  render.cfg.attach(*r_cmd);
  r_cmd->add_option("--frame", render.frame_path, "Frame image")->required();
  r_cmd->add_option("--depth", render.depth_path, "Depth PFM")->required();
  r_cmd->add_option("--out", render.out, "Output directory")->required();

  MetricsArgs metrics;
  CLI::App* m_cmd = app.add_subcommand("metrics", "Compare two bundle or frame directories");
  metrics.cfg.attach(*m_cmd);
  m_cmd->add_option("--a", metrics.a, "First bundle or frame directory")->required();
  m_cmd->add_option("--b", metrics.b, "Second bundle or frame directory")->required();
  m_cmd->add_option("--stream", metrics.stream, "Bundle stream to compare")->capture_default_str();
  m_cmd->add_option("--flows-a", metrics.flows_a, ".flo directory estimated on --a");
  m_cmd->add_option("--flows-b", metrics.flows_b, ".flo directory estimated on --b");
  m_cmd->add_option("--depth-a", metrics.depth_a, "Depth directory for --a (overrides bundle depths)");
  m_cmd->add_option("--depth-b", metrics.depth_b, "Depth directory for --b (overrides bundle depths)");
  m_cmd->add_option("--name", metrics.name, "Row name in the report");
  m_cmd->add_option("--json", metrics.json_out, "Write the JSON report here");
  m_cmd->add_option("--table", metrics.table_out, "Write the text table here");

  NoiseArgs noise;
  CLI::App* n_cmd = app.add_subcommand("noise", "Multiplicative Gaussian noise on a depth directory");
  noise.cfg.attach(*n_cmd);
  n_cmd->add_option("--depth-dir", noise.depth_dir, "Input depth directory")->required();
  n_cmd->add_option("--out", noise.out, "Output directory")->required();

  ValidateArgs val;
  CLI::App* v_cmd = app.add_subcommand("validate", "Trajectory, bundle or training-pair sanity report");
  v_cmd->add_option("--trajectory", val.trajectory, "Trajectory JSON");
  v_cmd->add_option("--frames", val.frames, "Frames to expand (default: the document's own count)");
  v_cmd->add_option("--bundle", val.bundle, "Bundle directory");
  v_cmd->add_option("--pair", val.pair, "Training pair directory (replays its recipe)");
  v_cmd->add_option("--workers", val.workers, "Worker threads (0 = all cores)")->capture_default_str();

  DemoOptions demo;
  std::string demo_out;
  CLI::App* d_cmd = app.add_subcommand("demo", "Write the synthetic three-clip dataset");
  d_cmd->add_option("--out", demo_out, "Output directory")->required();
  d_cmd->add_option("--width", demo.width, "Frame width")->capture_default_str();
  d_cmd->add_option("--height", demo.height, "Frame height")->capture_default_str();
  d_cmd->add_option("--frames", demo.frames, "Frames per clip")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    print_summary("usage", json::object(), kExitIo, e.what());
    return kExitIo;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    json body;
    int code = kExitOk;
    if (command == "condition") {
      body = run_condition(cond);
      if (!body["check"].get<bool>()) code = kExitValidation;
    } else if (command == "synth-pairs") {
      body = run_synth(synth);
    } else if (command == "render") {
      body = run_render(render);
    } else if (command == "metrics") {
      body = run_metrics(metrics);
    } else if (command == "noise") {
      body = run_noise(noise);
    } else if (command == "validate") {
      bool passed = false;
      body = run_validate(val, passed);
      if (!passed) code = kExitValidation;
    } else if (command == "demo") {
      write_demo_dataset(demo_out, demo);
      body = {{"out", demo_out}, {"clips", 3}};
    }
    print_summary(command, std::move(body), code);
    return code;
  } catch (const ParseError& e) {
    print_summary(command, json::object(), kExitIo, e.what());
    return kExitIo;
  } catch (const IoError& e) {
    print_summary(command, json::object(), kExitIo, e.what());
    return kExitIo;
  } catch (const Error& e) {
    print_summary(command, json::object(), kExitValidation, e.what());
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    print_summary(command, json::object(), kExitIo, e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    print_summary(command, json::object(), kExitIo, e.what());
    return kExitIo;
  }
}
