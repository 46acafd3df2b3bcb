#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "salisa/errors.hpp"
#include "salisa/grid_fit.hpp"
#include "salisa/inverse_transform.hpp"
#include "salisa/io/atomic_write.hpp"
#include "salisa/io/config.hpp"
#include "salisa/io/detection_file.hpp"
#include "salisa/io/grid_file.hpp"
#include "salisa/io/image_io.hpp"
#include "salisa/io/records.hpp"
#include "salisa/io/saliency_io.hpp"
#include "salisa/overlay.hpp"
#include "salisa/pipeline.hpp"
#include "salisa/saliency.hpp"
#include "salisa/synthetic.hpp"
#include "salisa/warp.hpp"

namespace fs = std::filesystem;
using namespace salisa;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr std::uint64_t kDefaultSeed = 0;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "1280x720" -> {height 720, width 1280}.
Extent parse_size(const std::string& text, const char* flag) {
  const auto x = text.find_first_of("xX");
  int w = 0;
  int h = 0;
  const bool ok = x != std::string::npos &&
                  std::from_chars(text.data(), text.data() + x, w).ptr == text.data() + x &&
                  std::from_chars(text.data() + x + 1, text.data() + text.size(), h).ptr == text.data() + text.size();
  if (!ok || w < 1 || h < 1) throw UsageError(std::string(flag) + " expects WIDTHxHEIGHT, got '" + text + "'");
  return {h, w};
}

io::RunConfig load_config(const std::string& path) {
  return path.empty() ? io::RunConfig{} : io::read_run_config(path);
}

double round_milli(double v) { return std::round(v * 1000.0) / 1000.0; }

// ---------------------------------------------------------------- saliency

struct SaliencyArgs {
  std::string detections, out, config, image_size, map_size;
  std::optional<int> image_id;
  std::optional<double> tau, alpha_pct;
};

int run_saliency(const SaliencyArgs& a) {
  auto cfg = load_config(a.config).pipeline.saliency;
  if (a.tau) cfg.tau = *a.tau;
  if (a.alpha_pct) cfg.alpha_pct = *a.alpha_pct;
  if (!a.map_size.empty()) cfg.out_size = parse_size(a.map_size, "--map-size");
  cfg.validate();

  std::optional<Extent> image;
  if (!a.image_size.empty()) image = parse_size(a.image_size, "--image-size");
  const auto file = io::read_detection_file(a.detections, false);
  std::vector<Detection> dets;
  if (a.image_id) {
    dets = file.detections_for(*a.image_id);
    if (!image) {
      const auto* entry = file.find_image(*a.image_id);
      if (entry && entry->width > 0 && entry->height > 0) image = Extent{entry->height, entry->width};
    }
  } else {
    dets = file.all_detections();
  }
  if (!image) throw UsageError("--image-size is required unless --image-id names an image with a size");
  io::write_saliency(a.out, generate_saliency(dets, *image, cfg));
  return 0;
}

// ---------------------------------------------------------------- grid

struct GridArgs {
  std::string saliency, out, out_size, config, working_size, emit_loss, marginal_mode;
  std::optional<int> control_points;
  std::optional<double> ridge_lambda, gamma, floor_eps;
};

int run_grid(const GridArgs& a) {
  auto cfg = load_config(a.config).pipeline;
  if (a.control_points) cfg.fit.control_points = *a.control_points;
  if (a.ridge_lambda) cfg.fit.ridge_lambda = *a.ridge_lambda;
  if (a.gamma) cfg.fit.gamma = *a.gamma;
  if (!a.working_size.empty()) cfg.fit.working_size = parse_size(a.working_size, "--working-size");
  if (a.floor_eps) cfg.sampler.floor_eps = *a.floor_eps;
  if (!a.marginal_mode.empty()) cfg.sampler.marginal_mode = a.marginal_mode == "sum" ? MarginalMode::Sum : MarginalMode::Max;
  cfg.fit.validate();
  cfg.sampler.validate();
  const Extent out_size = parse_size(a.out_size, "--out-size");

  const SaliencyMap map = io::read_saliency(a.saliency);
  const auto result = saliency_to_grid(map, cfg.fit, cfg.sampler, cfg.saliency, out_size);
  io::write_grid(a.out, result.grid);
  if (result.folds > 0) std::cerr << "warning: fitted grid folds over at " << result.folds << " node pairs\n";
  if (!a.emit_loss.empty()) {
    const nlohmann::json report = {
        {"loss", result.fit.loss},
        {"loss_unsquared", result.fit.loss_unsquared},
        {"residual_norm", result.fit.residual_norm},
        {"bending_energy", result.fit.model.bending_energy()},
        {"condition_estimate", result.fit.condition_estimate},
        {"control_points", cfg.fit.control_points},
        {"working_size", {cfg.fit.working_size.width, cfg.fit.working_size.height}},
        {"composition", to_string(result.composition)},
        {"folds", result.folds},
        {"marginal_mode", to_string(cfg.sampler.marginal_mode)},
        {"clamped", result.grid.clamped()}};
    io::write_file_atomic(a.emit_loss, report.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------- warp

int run_warp(const std::string& image, const std::string& grid, const std::string& out) {
  io::write_image(out, warp_image(io::read_image(image), io::read_grid(grid)));
  return 0;
}

// ---------------------------------------------------------------- invert

int run_invert(const std::string& detections, const std::string& grid_path, const std::string& out,
               const std::string& original_size) {
  const Extent original = parse_size(original_size, "--original-size");
  const SamplingGrid grid = io::read_grid(grid_path);
  const std::uint64_t id = grid_fingerprint(grid);
  auto file = io::read_detection_file(detections, false);

  io::DetectionFile result;
  result.images = file.images;
  for (auto& im : result.images) {
    im.width = original.width;
    im.height = original.height;
  }
  for (const auto& entry : file.detections) {
    Detection d = entry.detection;
    // Untagged boxes are taken to be in this grid's output space.
    if (d.space.kind == SpaceKind::Original) d.space = CoordinateSpace::resampled(id);
    const auto inv = invert_detections(std::span<const Detection>(&d, 1), grid, original);
    for (auto det : inv.detections) {
      det.box = {round_milli(det.box.x_min), round_milli(det.box.y_min), round_milli(det.box.x_max),
                 round_milli(det.box.y_max)};
      if (det.box.x_min < det.box.x_max && det.box.y_min < det.box.y_max) result.detections.push_back({entry.image_id, det});
    }
  }
  io::write_detection_file(out, result);
  return 0;
}

// ---------------------------------------------------------------- pipeline

struct PipelineArgs {
  std::string config, frames, out_dir;
  std::optional<int> synthetic;
  std::optional<std::uint64_t> seed;
};

std::unique_ptr<Detector> build_detector(const DetectorSpec& spec, std::uint64_t seed, const fs::path& base_dir,
                                         const fs::path& scratch, const SyntheticSequence* synth) {
  if (spec.kind == DetectorKind::AnnotationPlayback && spec.source == "synthetic") {
    if (!synth) throw UsageError("detector source \"synthetic\" needs --synthetic");
    return std::make_unique<PlaybackDetector>(io::detections_by_frame(synth->annotations()), spec.noise, seed);
  }
  return make_detector(spec, seed, base_dir, scratch);
}

int run_pipeline_cmd(const PipelineArgs& a) {
  if (a.frames.empty() == !a.synthetic) throw UsageError("give exactly one of --frames or --synthetic");
  io::RunConfig cfg = load_config(a.config);
  if (a.config.empty() && a.synthetic) {
    cfg.key_detector.kind = DetectorKind::AnnotationPlayback;
    cfg.key_detector.source = "synthetic";
    cfg.light_detector.kind = DetectorKind::AnnotationPlayback;
    cfg.light_detector.source = "synthetic";
  }
  cfg.seed = a.seed.value_or(a.config.empty() ? kDefaultSeed : cfg.seed);
  const fs::path base_dir = a.config.empty() ? fs::current_path() : fs::path(a.config).parent_path();

  std::unique_ptr<FrameSource> source;
  const SyntheticSequence* synth = nullptr;
  if (a.synthetic) {
    if (*a.synthetic < 1) throw UsageError("--synthetic needs a positive frame count");
    SyntheticSpec spec;
    spec.frames = *a.synthetic;
    spec.seed = cfg.seed;
    auto seq = std::make_unique<SyntheticSequence>(spec);
    synth = seq.get();
    source = std::move(seq);
  } else {
    source = std::make_unique<ImageSequence>(a.frames);
  }

  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  const fs::path scratch = out_dir / ".scratch";
  auto key = build_detector(cfg.key_detector, cfg.seed, base_dir, scratch, synth);
  auto light = build_detector(cfg.light_detector, cfg.seed ^ 0x9e3779b97f4a7c15ULL, base_dir, scratch, synth);

  const fs::path frames_path = out_dir / "frames.jsonl";
  const fs::path frames_tmp = out_dir / "frames.jsonl.tmp";
  std::ofstream stream(frames_tmp, std::ios::binary | std::ios::trunc);
  if (!stream) throw FormatError("cannot write " + frames_tmp.string());
  const auto result = run_pipeline(*source, *key, *light, cfg.pipeline, [&](const FrameRecord& r) {
    stream << io::frame_record_line(r) << '\n';
    stream.flush();
  });
  stream.close();
  if (!stream) throw FormatError("write failed: " + frames_tmp.string());
  fs::rename(frames_tmp, frames_path);
  fs::remove_all(scratch);

  io::write_detection_file(out_dir / "detections.json", io::records_to_detection_file(result.frames, source->extent()));
  io::write_file_atomic(out_dir / "summary.json", io::summary_json(result.summary, cfg));
  std::printf("frames %d  key %d  resampled %d  propagated %d  failed %d  mean %.5f GFLOPs\n", result.summary.frames,
              result.summary.key_frames, result.summary.resampled_frames, result.summary.propagated_frames,
              result.summary.failed_frames, result.summary.mean_gflops);
  return 0;
}

// ---------------------------------------------------------------- overlay

struct OverlayArgs {
  std::string image, grid, detections, out;
  std::optional<int> image_id;
  int grid_step = 8;
};

int run_overlay(const OverlayArgs& a) {
  if (a.grid.empty() && a.detections.empty()) throw UsageError("overlay needs --grid and/or --detections");
  if (a.grid_step < 1) throw UsageError("--grid-step must be positive");
  const ImageBuffer image = io::read_image(a.image);
  std::optional<SamplingGrid> grid;
  if (!a.grid.empty()) grid = io::read_grid(a.grid);
  std::vector<Detection> dets;
  if (!a.detections.empty()) {
    const auto file = io::read_detection_file(a.detections, false);
    dets = a.image_id ? file.detections_for(*a.image_id) : file.all_detections();
  }
  OverlayStyle style;
  style.grid_step = a.grid_step;
  io::write_image(a.out, render_overlay(image, grid ? &*grid : nullptr, dets, style));
  return 0;
}

// ---------------------------------------------------------------- synth

int run_synth(int frames, const std::string& size, int objects, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
  SyntheticSpec spec;
  spec.frames = frames;
  spec.objects = objects;
  spec.seed = seed.value_or(kDefaultSeed);
  if (!size.empty()) spec.size = parse_size(size, "--size");
  if (frames < 1 || objects < 0) throw UsageError("--frames must be positive and --objects non-negative");
  const SyntheticSequence seq(spec);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  for (int k = 0; k < seq.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.ppm", k);
    io::write_image(dir / name, seq.frame(k));
  }
  io::write_detection_file(dir / "annotations.json", seq.annotations());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saliency-guided non-uniform image downsampling"};
  app.require_subcommand(1);

  SaliencyArgs sal;
  auto* s = app.add_subcommand("saliency", "Build a saliency map from detections");
  s->add_option("--detections", sal.detections, "Detection JSON")->required();
  s->add_option("--out", sal.out, "Output map (.pgm = 16-bit PGM, otherwise float raster)")->required();
  s->add_option("--image-size", sal.image_size, "Original image size WIDTHxHEIGHT");
  s->add_option("--image-id", sal.image_id, "Use only detections of this image");
  s->add_option("--config", sal.config, "Run configuration");
  s->add_option("--tau", sal.tau, "Score threshold");
  s->add_option("--alpha-pct", sal.alpha_pct, "Small-object area threshold, percent of the image");
  s->add_option("--map-size", sal.map_size, "Map size WIDTHxHEIGHT");

  GridArgs grd;
  auto* g = app.add_subcommand("grid", "Fit a sampling grid to a saliency map");
  g->add_option("--saliency", grd.saliency, "Saliency map")->required();
  g->add_option("--out", grd.out, "Output grid file")->required();
  g->add_option("--out-size", grd.out_size, "Grid size WIDTHxHEIGHT")->required();
  g->add_option("--control-points", grd.control_points, "Number of control points (perfect square)");
  g->add_option("--working-size", grd.working_size, "Fit resolution WIDTHxHEIGHT");
  g->add_option("--ridge-lambda", grd.ridge_lambda, "Ridge term");
  g->add_option("--gamma", grd.gamma, "Background weight for single-level maps");
  g->add_option("--floor-eps", grd.floor_eps, "Marginal density floor");
  g->add_option("--marginal-mode", grd.marginal_mode, "max or sum")->check(CLI::IsMember({"max", "sum"}));
  g->add_option("--emit-loss", grd.emit_loss, "Write a JSON fit report here");
  g->add_option("--config", grd.config, "Run configuration");

  std::string w_image, w_grid, w_out;
  auto* w = app.add_subcommand("warp", "Resample an image through a grid");
  w->add_option("--image", w_image, "Input image")->required();
  w->add_option("--grid", w_grid, "Grid file")->required();
  w->add_option("--out", w_out, "Output image (.png, .ppm, .pgm)")->required();

  std::string i_dets, i_grid, i_out, i_size;
  auto* inv = app.add_subcommand("invert", "Map resampled-space detections back to the original image");
  inv->add_option("--detections", i_dets, "Detection JSON in resampled coordinates")->required();
  inv->add_option("--grid", i_grid, "Grid the image was resampled with")->required();
  inv->add_option("--original-size", i_size, "Original image size WIDTHxHEIGHT")->required();
  inv->add_option("--out", i_out, "Output detection JSON")->required();

  PipelineArgs pip;
  auto* p = app.add_subcommand("pipeline", "Run the key-frame / resampled-frame video pipeline");
  p->add_option("--config", pip.config, "Run configuration");
  p->add_option("--frames", pip.frames, "Directory of frame images");
  p->add_option("--synthetic", pip.synthetic, "Generate this many synthetic frames instead");
  p->add_option("--out-dir", pip.out_dir, "Output directory")->required();
  p->add_option("--seed", pip.seed, "Random seed (default 0)");

  OverlayArgs ov;
  auto* o = app.add_subcommand("overlay", "Draw the deformation field and boxes over an image");
  o->add_option("--image", ov.image, "Input image")->required();
  o->add_option("--grid", ov.grid, "Grid file");
  o->add_option("--detections", ov.detections, "Detection JSON");
  o->add_option("--image-id", ov.image_id, "Draw only detections of this image");
  o->add_option("--grid-step", ov.grid_step, "Draw every n-th grid line");
  o->add_option("--out", ov.out, "Output image")->required();

  int sy_frames = 64, sy_objects = 6;
  std::string sy_size, sy_out;
  std::optional<std::uint64_t> sy_seed;
  auto* sy = app.add_subcommand("synth", "Write a synthetic frame sequence with ground truth");
  sy->add_option("--frames", sy_frames, "Frame count");
  sy->add_option("--size", sy_size, "Frame size WIDTHxHEIGHT (default 640x360)");
  sy->add_option("--objects", sy_objects, "Moving objects");
  sy->add_option("--seed", sy_seed, "Random seed (default 0)");
  sy->add_option("--out-dir", sy_out, "Output directory")->required();

  std::string c_out;
  auto* c = app.add_subcommand("config", "Print the annotated default configuration");
  c->add_option("--out", c_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*s) return run_saliency(sal);
    if (*g) return run_grid(grd);
    if (*w) return run_warp(w_image, w_grid, w_out);
    if (*inv) return run_invert(i_dets, i_grid, i_out, i_size);
    if (*p) return run_pipeline_cmd(pip);
    if (*o) return run_overlay(ov);
    if (*sy) return run_synth(sy_frames, sy_size, sy_objects, sy_seed, sy_out);
    if (*c) {
      if (c_out.empty()) {
        std::cout << io::default_run_config_toml();
      } else {
        io::write_file_atomic(c_out, io::default_run_config_toml());
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
