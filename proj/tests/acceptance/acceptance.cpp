// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "salisa/attention_sampler.hpp"
#include "salisa/detectors.hpp"
#include "salisa/grid_fit.hpp"
#include "salisa/inverse_transform.hpp"
#include "salisa/io/atomic_write.hpp"
#include "salisa/pipeline.hpp"
#include "salisa/saliency.hpp"
#include "salisa/synthetic.hpp"
#include "salisa/tps.hpp"
#include "salisa/warp.hpp"

using namespace salisa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixX2d random_delta(std::mt19937_64& rng, int n, double amp) {
  Eigen::MatrixX2d d(n, 2);
  for (int i = 0; i < n; ++i) {
    d(i, 0) = oracle::uniform(rng, -amp, amp);
    d(i, 1) = oracle::uniform(rng, -amp, amp);
  }
  return d;
}

Detection centered_small_object() {
  const double w = std::sqrt(0.004 * 1280 * 720 * 16.0 / 9.0);
  const double h = w * 9.0 / 16.0;
  return {{639.5 - w / 2, 359.5 - h / 2, 639.5 + w / 2, 359.5 + h / 2}, 0.9};
}

// ------------------------------------------------------------------ 1

Outcome tps_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto system = shared_system(256);
  const auto pts = system->control_grid().points();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixX2d delta = random_delta(rng, 256, 0.05);
    const TpsModel model = solve_displacements(system, delta);
    for (int i = 0; i < 256; ++i) {
      const NormCoord v = evaluate(model, pts[i]);
      worst = std::max({worst, std::abs(v.x - (pts[i].x + delta(i, 0))), std::abs(v.y - (pts[i].y + delta(i, 1)))});
    }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-7 && t < 5.0, fmt("max error %.3g, %.2f s", worst, t)};
}

// ------------------------------------------------------------------ 2

Outcome identity_chain() {
  const Extent size{360, 640};
  const auto system = shared_system(256);
  const TpsModel model = solve_displacements(system, Eigen::MatrixX2d::Zero(256, 2));
  const SamplingGrid grid = dense_grid(model, size.height, size.width);
  const SamplingGrid id = identity_grid(size.height, size.width);
  double dev = 0.0;
  for (std::size_t k = 0; k < id.coords().size(); ++k) {
    dev = std::max({dev, std::abs(grid.coords()[k].x - id.coords()[k].x),
                    std::abs(grid.coords()[k].y - id.coords()[k].y)});
  }

  std::mt19937_64 rng(7);
  std::vector<float> px(static_cast<std::size_t>(size.height) * size.width * 3);
  for (auto& v : px) v = static_cast<float>(oracle::uniform(rng, 0, 1));
  const ImageBuffer image(size.height, size.width, 3, px);
  const bool exact = warp_image(image, grid) == image;

  const CoordinateSpace space = CoordinateSpace::resampled(grid_fingerprint(grid));
  std::vector<Detection> dets;
  for (int k = 0; k < 50; ++k) {
    const double x = oracle::uniform(rng, 0, 600), y = oracle::uniform(rng, 0, 320);
    dets.push_back({{x, y, x + oracle::uniform(rng, 1, 39), y + oracle::uniform(rng, 1, 39)}, 0.5, k % 5, space});
  }
  const auto inv = invert_detections(dets, grid, size);
  double box_dev = inv.detections.size() == dets.size() ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < inv.detections.size() && k < dets.size(); ++k) {
    const auto& a = dets[k].box;
    const auto& b = inv.detections[k].box;
    box_dev = std::max({box_dev, std::abs(a.x_min - b.x_min), std::abs(a.y_min - b.y_min),
                        std::abs(a.x_max - b.x_max), std::abs(a.y_max - b.y_max)});
    if (dets[k].score != inv.detections[k].score || dets[k].category != inv.detections[k].category) box_dev = INFINITY;
  }
  return {dev < 1e-9 && exact && box_dev < 1e-6,
          fmt("grid deviation %.3g, warp %s, box deviation %.3g px", dev, exact ? "bit-exact" : "DIFFERS", box_dev)};
}

// ------------------------------------------------------------------ 3

Outcome dense_vs_pointwise() {
  const auto system = shared_system(256);
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const TpsModel model = solve_displacements(system, random_delta(rng, 256, 0.05));
    const SamplingGrid g = dense_grid(model, 64, 64);
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        const NormCoord v = evaluate(model, {-1.0 + 2.0 * c / 63, -1.0 + 2.0 * r / 63});
        const NormCoord d = g.at(r, c);
        worst = std::max({worst, std::abs(d.x - std::clamp(v.x, -1.0, 1.0)), std::abs(d.y - std::clamp(v.y, -1.0, 1.0))});
      }
    }
  }
  return {worst < 1e-9, fmt("max difference %.3g over 20 models", worst)};
}

// ------------------------------------------------------------------ 4

// B = L' L^{-1}[:, :n] for the 16x16 lattice at side x side, built in long
// double from the oracle basis.
Eigen::MatrixXd oracle_design(int side) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const auto pts = oracle::lattice(16);
  const int n = static_cast<int>(pts.size());
  Mat L = Mat::Zero(n + 3, n + 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) L(i, j) = oracle::basis(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
    L(i, n) = L(n, i) = 1.0L;
    L(i, n + 1) = L(n + 1, i) = pts[i].x;
    L(i, n + 2) = L(n + 2, i) = pts[i].y;
  }
  const Mat Linv = L.fullPivLu().inverse();
  const auto cells = oracle::lattice(side);
  Mat Lp(static_cast<int>(cells.size()), n + 3);
  for (int k = 0; k < static_cast<int>(cells.size()); ++k) {
    for (int i = 0; i < n; ++i) Lp(k, i) = oracle::basis(cells[k].x - pts[i].x, cells[k].y - pts[i].y);
    Lp(k, n) = 1.0L;
    Lp(k, n + 1) = cells[k].x;
    Lp(k, n + 2) = cells[k].y;
  }
  return (Lp * Linv.leftCols(n)).cast<double>();
}

Outcome weighted_ls_optimality() {
  constexpr int side = 32;
  const Eigen::MatrixXd B = oracle_design(side);
  const auto pts = oracle::lattice(16);
  Eigen::MatrixX2d P(256, 2);
  for (int i = 0; i < 256; ++i) P.row(i) << pts[i].x, pts[i].y;
  const Eigen::MatrixX2d G0 = B * P;
  const auto cells = oracle::lattice(side);

  FitConfig cfg;
  cfg.ridge_lambda = 0.0;
  cfg.working_size = {side, side};
  std::mt19937_64 rng(404);
  double worst_rel = 0.0;
  double worst_shift = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<NormCoord> target(cells.size());
    std::vector<double> m(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      target[k] = {cells[k].x + oracle::uniform(rng, -0.05, 0.05), cells[k].y + oracle::uniform(rng, -0.05, 0.05)};
      m[k] = rng() % 4 == 0 ? 0.0 : oracle::uniform(rng, 0.1, 1.0);
    }
    const WeightMask mask(side, side, m);
    const FitResult lib = fit(SamplingGrid(side, side, target), mask, cfg);

    Eigen::MatrixXd A(cells.size(), 256);
    Eigen::MatrixX2d b(cells.size(), 2);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const double s = std::sqrt(m[k]);
      A.row(k) = s * B.row(k);
      b.row(k) << s * (target[k].x - G0(k, 0)), s * (target[k].y - G0(k, 1));
    }
    const Eigen::MatrixX2d delta = A.completeOrthogonalDecomposition().solve(b);
    const double residual = (A * delta - b).norm();
    worst_rel = std::max(worst_rel, std::abs(lib.residual_norm - residual) / residual);

    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (m[k] == 0.0) target[k] = {oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
    }
    const FitResult moved = fit(SamplingGrid(side, side, target), mask, cfg);
    worst_shift = std::max(worst_shift, (moved.delta - lib.delta).cwiseAbs().maxCoeff());
  }
  return {worst_rel < 1e-6 && worst_shift < 1e-9,
          fmt("residual relative error %.3g, zero-weight perturbation moves delta by %.3g", worst_rel, worst_shift)};
}

// ------------------------------------------------------------------ 5

Outcome attention_cross_artifact() {
  constexpr int n = 128;
  std::vector<float> v(n * n, 0.0f);
  auto blob = [&](int r0, int c0) {
    for (int r = r0; r < r0 + 16; ++r) {
      for (int c = c0; c < c0 + 16; ++c) v[r * n + c] = 1.0f;
    }
  };
  blob(20, 20);
  blob(90, 90);
  const SaliencyMap map(n, n, v);
  AttentionSamplerConfig cfg;
  cfg.out_size = {n, n};
  const SamplingGrid g = attention_grid(map, cfg);

  // Oracle grid: max-reduced marginals plus the floor, inverted by bisection.
  std::vector<double> dx(n), dy(n);
  for (int k = 0; k < n; ++k) {
    double mx = 0.0, my = 0.0;
    for (int t = 0; t < n; ++t) {
      mx = std::max(mx, static_cast<double>(v[t * n + k]));
      my = std::max(my, static_cast<double>(v[k * n + t]));
    }
    dx[k] = mx + cfg.floor_eps;
    dy[k] = my + cfg.floor_eps;
  }
  std::vector<NormCoord> ref(n * n);
  for (int i = 0; i < n; ++i) {
    const double y = oracle::inverse_cdf_bisect(dy, static_cast<double>(i) / (n - 1), 1e-12);
    for (int j = 0; j < n; ++j) ref[i * n + j] = {oracle::inverse_cdf_bisect(dx, static_cast<double>(j) / (n - 1), 1e-12), y};
  }
  double oracle_dev = 0.0;
  for (int k = 0; k < n * n; ++k) {
    oracle_dev = std::max({oracle_dev, std::abs(g.coords()[k].x - ref[k].x), std::abs(g.coords()[k].y - ref[k].y)});
  }

  auto count = [&](const auto& coords, int r0, int c0) {
    const double x0 = -1.0 + 2.0 * c0 / n, x1 = -1.0 + 2.0 * (c0 + 16) / n;
    const double y0 = -1.0 + 2.0 * r0 / n, y1 = -1.0 + 2.0 * (r0 + 16) / n;
    int hits = 0;
    for (const auto& c : coords) hits += c.x >= x0 && c.x < x1 && c.y >= y0 && c.y < y1;
    return hits;
  };
  const int cross_a = count(g.coords(), 20, 90);
  const int cross_b = count(g.coords(), 90, 20);
  const int background = count(g.coords(), 55, 55);
  const int oracle_cross = count(ref, 20, 90);
  const int oracle_background = count(ref, 55, 55);

  const SamplingGrid again = attention_grid(map, cfg);
  bool deterministic = std::memcmp(g.coords().data(), again.coords().data(), g.coords().size_bytes()) == 0;
  SaliencyConfig sal;
  const auto fit_a = saliency_to_grid(map, {}, {}, sal, {90, 160});
  const auto fit_b = saliency_to_grid(map, {}, {}, sal, {90, 160});
  deterministic = deterministic && std::memcmp(fit_a.grid.coords().data(), fit_b.grid.coords().data(),
                                               fit_a.grid.coords().size_bytes()) == 0;

  const bool pass = cross_a >= 2 * std::max(background, 1) && cross_b >= 2 * std::max(background, 1) &&
                    oracle_cross >= 2 * std::max(oracle_background, 1) && oracle_dev < 1e-9 && deterministic;
  return {pass, fmt("cross windows %d/%d samples vs background %d (oracle %d vs %d), oracle deviation %.3g, %s", cross_a,
                    cross_b, background, oracle_cross, oracle_background, oracle_dev,
                    deterministic ? "byte-deterministic" : "NOT deterministic")};
}

// ------------------------------------------------------------------ 6

Outcome zoom_effect() {
  const Extent original{720, 1280};
  const Detection obj = centered_small_object();
  SaliencyConfig sal;
  sal.alpha_pct = 0.5;
  const SaliencyMap map = generate_saliency(std::vector<Detection>{obj}, original, sal);
  const FitConfig fit_cfg;
  const AttentionSamplerConfig sampler;
  const auto result = saliency_to_grid(map, fit_cfg, sampler, sal, {360, 640});

  const NormCoord lo = pixel_to_norm({obj.box.x_min, obj.box.y_min}, original);
  const NormCoord hi = pixel_to_norm({obj.box.x_max, obj.box.y_max}, original);
  auto inside = [&](NormCoord p) { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; };
  double in_sum = 0, out_sum = 0;
  long in_n = 0, out_n = 0;
  const SamplingGrid& g = result.grid;
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      const NormCoord a = g.at(r, c);
      for (const auto& [nr, nc] : {std::pair{r, c + 1}, std::pair{r + 1, c}}) {
        if (nr >= g.height() || nc >= g.width()) continue;
        const NormCoord b = g.at(nr, nc);
        const double gap = std::hypot(b.x - a.x, b.y - a.y);
        if (inside(a) && inside(b)) {
          in_sum += gap;
          ++in_n;
        } else if (!inside(a) && !inside(b)) {
          out_sum += gap;
          ++out_n;
        }
      }
    }
  }
  const double ratio = in_n > 0 && out_n > 0 ? (in_sum / in_n) / (out_sum / out_n) : INFINITY;

  AttentionSamplerConfig working = sampler;
  working.out_size = fit_cfg.working_size;
  const SamplingGrid reference = attention_grid(map, working);
  const WeightMask mask = build_mask(map, result.composition, fit_cfg.gamma, fit_cfg.working_size, sal);
  const SamplingGrid fitted = dense_grid(result.fit.model, fit_cfg.working_size.height, fit_cfg.working_size.width);
  const double loss_fit = loss_grid(fitted, reference, mask);
  const double loss_id =
      loss_grid(identity_grid(fit_cfg.working_size.height, fit_cfg.working_size.width), reference, mask);
  return {ratio <= 0.8 && loss_fit < loss_id,
          fmt("spacing ratio %.3f (%ld inside pairs), loss %.4g vs identity %.4g", ratio, in_n, loss_fit, loss_id)};
}

// ------------------------------------------------------------------ 7

Outcome control_point_ablation() {
  const SaliencyMap map = generate_saliency(std::vector<Detection>{centered_small_object()}, {720, 1280}, {});
  FitConfig c256;
  FitConfig c1024;
  c1024.control_points = 1024;
  const double e256 = saliency_to_grid(map, c256, {}, {}, {64, 64}).fit.model.bending_energy();
  const double e1024 = saliency_to_grid(map, c1024, {}, {}, {64, 64}).fit.model.bending_energy();
  return {e1024 >= e256, fmt("bending energy %.4g (N=1024) vs %.4g (N=256)", e1024, e256)};
}

// ------------------------------------------------------------------ 8

// Winding number of the grid's boundary ring (in original pixels) around p.
// Bilinear cells are straight along their edges, so the ring is exact, and a
// nonzero winding number means some cell covers p.
int winding_number(const SamplingGrid& g, Extent original, PixelCoord p) {
  std::vector<PixelCoord> ring;
  const int h = g.height(), w = g.width();
  for (int c = 0; c < w - 1; ++c) ring.push_back(norm_to_pixel(g.at(0, c), original));
  for (int r = 0; r < h - 1; ++r) ring.push_back(norm_to_pixel(g.at(r, w - 1), original));
  for (int c = w - 1; c > 0; --c) ring.push_back(norm_to_pixel(g.at(h - 1, c), original));
  for (int r = h - 1; r > 0; --r) ring.push_back(norm_to_pixel(g.at(r, 0), original));
  int wn = 0;
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const PixelCoord a = ring[k], b = ring[(k + 1) % ring.size()];
    const double side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y && b.y > p.y && side > 0) ++wn;
    if (a.y > p.y && b.y <= p.y && side < 0) --wn;
  }
  return wn;
}

Outcome inversion_round_trip() {
  const Extent original{720, 1280};
  std::mt19937_64 rng(808);
  double worst = 0.0;
  int failures = 0;
  int points = 0;
  int drawn = 0;
  std::size_t folds = 0;
  for (int scene = 0; scene < 4; ++scene) {
    std::vector<Detection> dets;
    const int count = 1 + static_cast<int>(rng() % 5);
    for (int k = 0; k < count; ++k) {
      const double w = oracle::uniform(rng, 30, 400), h = oracle::uniform(rng, 30, 300);
      const double x = oracle::uniform(rng, 0, 1279 - w), y = oracle::uniform(rng, 0, 719 - h);
      dets.push_back({{x, y, x + w, y + h}, oracle::uniform(rng, 0.5, 1.0)});
    }
    const auto fitted = saliency_to_grid(generate_saliency(dets, original, {}), {}, {}, {}, {360, 640});
    folds += fitted.folds;
    for (int k = 0; k < 250;) {
      const PixelCoord p{oracle::uniform(rng, 0, 1279), oracle::uniform(rng, 0, 719)};
      ++drawn;
      // forward mapping is undefined where no resampled pixel lands
      if (winding_number(fitted.grid, original, p) == 0) continue;
      ++k;
      ++points;
      const ForwardPoint f = forward_point(p, fitted.grid, original);
      const PixelCoord back = invert_point(f.point, fitted.grid, original).point;
      const double err = std::hypot(back.x - p.x, back.y - p.y);
      worst = std::max(worst, err);
      failures += !(err < 0.5);
    }
  }
  return {failures == 0,
          fmt("%d covered points, max deviation %.3g px, %d over 0.5 px; %d of %d uniform draws fell outside the "
              "fitted grids' coverage; %zu folded node pairs",
              points, worst, failures, drawn - points, drawn, folds)};
}

// ------------------------------------------------------------------ 9

Outcome pipeline_accounting() {
  SyntheticSpec spec;
  spec.frames = 16;
  const SyntheticSequence frames(spec);
  const auto truth = io::detections_by_frame(frames.annotations());
  PlaybackDetector key(truth);
  PlaybackDetector light(truth);
  PipelineConfig cfg;
  cfg.schedule.keyframe_interval = 16;
  cfg.schedule.propagate_odd_frames = false;
  cfg.costs = {*known_cost_gflops("efficientdet-d1"), *known_cost_gflops("efficientdet-d0"),
               *known_cost_gflops("salisa-sampler")};
  const auto result = run_pipeline(frames, key, light, cfg);
  bool keys_ok = true;
  for (const auto& f : result.frames) keys_ok = keys_ok && ((f.role == FrameRole::Key) == (f.index % 16 == 0));
  for (int i = 0; i < 1000; ++i) keys_ok = keys_ok && ((scheduled_role(i, cfg.schedule) == FrameRole::Key) == (i % 16 == 0));
  const bool exact = result.summary.mean_gflops == 1.53125;
  return {exact && keys_ok && result.summary.failed_frames == 0,
          fmt("mean %.17g GFLOPs, %d key / %d resampled frames, key indices %s", result.summary.mean_gflops,
              result.summary.key_frames, result.summary.resampled_frames, keys_ok ? "= 0 mod 16" : "WRONG")};
}

// ------------------------------------------------------------------ 10

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  std::size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) other += e.is_regular_file();
  if (files.empty() || other != files.size()) {
    why = "file sets differ";
    return false;
  }
  for (const auto& f : files) {
    if (!fs::exists(b / f) || io::read_file(a / f) != io::read_file(b / f)) {
      why = f.string() + " differs";
      return false;
    }
  }
  return true;
}

Outcome end_to_end_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("salisa_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  io::write_file_atomic(dir / "run.toml",
                        "seed = 42\n"
                        "[detector.key]\nkind = \"playback\"\nsource = \"synthetic\"\n"
                        "[detector.light]\nkind = \"playback\"\nsource = \"synthetic\"\njitter_pct = 3.0\n"
                        "drop_rate = 0.1\n");
  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("OMP_NUM_THREADS=1 ") + SALISA_CLI_PATH + " pipeline --synthetic 64 --config " +
                            (dir / "run.toml").string() + " --out-dir " + (dir / run).string() + " >/dev/null";
    status |= std::system(cmd.c_str());
  }
  const double t = seconds_since(t0);
  std::string why = "identical";
  const bool same = status == 0 && same_tree(dir / "a", dir / "b", why);
  fs::remove_all(dir);
  if (status != 0) why = "pipeline exited with an error";
  return {same && t < 60.0, fmt("two 64-frame runs at 640x360: %s, %.1f s total", why.c_str(), t)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"TPS exactness", tps_exactness},
      {"identity chain", identity_chain},
      {"dense/pointwise equivalence", dense_vs_pointwise},
      {"weighted least-squares optimality", weighted_ls_optimality},
      {"attention-sampler cross artifact", attention_cross_artifact},
      {"zoom effect", zoom_effect},
      {"control-point ablation direction", control_point_ablation},
      {"inversion round trip", inversion_round_trip},
      {"pipeline accounting", pipeline_accounting},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %2zu. %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
