#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>

#include "salisa/detectors.hpp"
#include "salisa/errors.hpp"
#include "salisa/inverse_transform.hpp"
#include "salisa/pipeline.hpp"
#include "salisa/synthetic.hpp"

using namespace salisa;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SALISA_TEST_DATA_DIR;

class FlatFrames final : public FrameSource {
 public:
  FlatFrames(int n, Extent e) : n_(n), e_(e) {}
  int size() const override { return n_; }
  Extent extent() const override { return e_; }
  ImageBuffer frame(int index) const override { return ImageBuffer(e_.height, e_.width, 3, (index % 10) / 10.0f); }

 private:
  int n_;
  Extent e_;
};

/// Returns one fixed Original-space box on every call and counts calls.
class FixedDetector final : public Detector {
 public:
  std::vector<Detection> detect(const DetectorRequest& r) override {
    ++calls;
    Detection d{{70, 40, 90, 50}, 0.9};
    if (r.grid) return forward_detections(std::vector<Detection>{d}, *r.grid, r.original).detections;
    return {d};
  }
  int calls = 0;
};

class ThrowingDetector final : public Detector {
 public:
  std::vector<Detection> detect(const DetectorRequest& r) override {
    if (r.frame_index == fail_at) throw DetectorError("boom");
    return {};
  }
  int fail_at = -1;
};

PipelineConfig small_config(int interval, bool propagate) {
  PipelineConfig cfg;
  cfg.schedule.keyframe_interval = interval;
  cfg.schedule.propagate_odd_frames = propagate;
  cfg.schedule.resampled_size = {45, 80};
  return cfg;
}

}  // namespace

TEST(Schedule, KeyFramesAtMultiplesOfInterval) {
  ScheduleConfig s;
  int keys = 0;
  for (int i = 0; i < 100; ++i) {
    const auto role = scheduled_role(i, s);
    if (role == FrameRole::Key) {
      ++keys;
      EXPECT_EQ(i % 16, 0);
    }
  }
  EXPECT_EQ(keys, 7);  // ceil(100 / 16)
  EXPECT_EQ(scheduled_role(1, s), FrameRole::Resampled);
  EXPECT_EQ(scheduled_role(2, s), FrameRole::Propagated);
  s.propagate_odd_frames = false;
  EXPECT_EQ(scheduled_role(2, s), FrameRole::Resampled);
}

TEST(Schedule, DenseModeCostOfSixteenFrames) {
  ScheduleConfig s;
  s.propagate_odd_frames = false;
  const CostTable c;
  EXPECT_DOUBLE_EQ(expected_mean_gflops(16, s, c), (3.2 + 15 * (1.36 + 0.06)) / 16);
}

TEST(RunPipeline, DenseModeSixteenFrames) {
  FixedDetector key, light;
  const auto r = run_pipeline(FlatFrames(16, {90, 160}), key, light, small_config(16, false));
  EXPECT_EQ(r.summary.key_frames, 1);
  EXPECT_EQ(r.summary.resampled_frames, 15);
  EXPECT_EQ(r.summary.failed_frames, 0);
  EXPECT_EQ(r.summary.mean_gflops, (3.2 + 15 * (1.36 + 0.06)) / 16);
  EXPECT_EQ(key.calls, 1);
  EXPECT_EQ(light.calls, 15);
  for (const auto& f : r.frames) {
    ASSERT_EQ(f.detections.size(), 1u);
    EXPECT_EQ(f.detections[0].space, CoordinateSpace::original());
    EXPECT_NEAR(f.detections[0].box.x_min, 70, 0.5);
    EXPECT_NEAR(f.detections[0].box.y_max, 50, 0.5);
  }
}

TEST(RunPipeline, MeanCostMatchesClosedFormForManySchedules) {
  for (int s : {1, 2, 3, 5, 16}) {
    for (bool prop : {true, false}) {
      NullDetector key, light;
      const auto cfg = small_config(s, prop);
      const auto r = run_pipeline(FlatFrames(23, {90, 160}), key, light, cfg);
      EXPECT_DOUBLE_EQ(r.summary.mean_gflops, expected_mean_gflops(23, cfg.schedule, cfg.costs));
    }
  }
}

TEST(RunPipeline, IntervalOneRunsKeyDetectorEverywhere) {
  FixedDetector key, light;
  const auto r = run_pipeline(FlatFrames(5, {90, 160}), key, light, small_config(1, true));
  EXPECT_EQ(key.calls, 5);
  EXPECT_EQ(light.calls, 0);
  for (const auto& f : r.frames) {
    EXPECT_EQ(f.role, FrameRole::Key);
    ASSERT_EQ(f.detections.size(), 1u);
    EXPECT_EQ(f.detections[0].box, (BoundingBox{70, 40, 90, 50}));
  }
}

TEST(RunPipeline, NullLightDetectorStillPropagates) {
  FixedDetector key;
  NullDetector light;
  const auto r = run_pipeline(FlatFrames(4, {90, 160}), key, light, small_config(16, true));
  EXPECT_EQ(r.frames[1].role, FrameRole::Resampled);
  EXPECT_TRUE(r.frames[1].detections.empty());
  EXPECT_EQ(r.frames[2].role, FrameRole::Propagated);
  EXPECT_TRUE(r.frames[2].detections.empty());
  EXPECT_EQ(r.frames[2].cost_gflops, 0.0);
}

TEST(RunPipeline, PropagatedFrameCopiesPreviousDetections) {
  FixedDetector key, light;
  const auto r = run_pipeline(FlatFrames(3, {90, 160}), key, light, small_config(16, true));
  EXPECT_EQ(r.frames[2].role, FrameRole::Propagated);
  EXPECT_EQ(r.frames[2].detections, r.frames[1].detections);
}

TEST(RunPipeline, DetectorFailureIsRecordedAndNextFrameUsesIdentity) {
  FixedDetector key;
  ThrowingDetector light;
  light.fail_at = 1;
  const auto r = run_pipeline(FlatFrames(4, {90, 160}), key, light, small_config(16, false));
  EXPECT_TRUE(r.frames[1].failed);
  EXPECT_NE(r.frames[1].error.find("boom"), std::string::npos);
  EXPECT_EQ(r.frames[1].cost_gflops, 1.36 + 0.06);
  EXPECT_EQ(r.summary.failed_frames, 1);
  EXPECT_FALSE(r.frames[2].failed);
  EXPECT_EQ(*r.frames[2].grid_id, grid_fingerprint(identity_grid(45, 80)));
  EXPECT_FALSE(r.frames[2].composition.has_value());
}

TEST(RunPipeline, GridDependsOnlyOnEarlierFrames) {
  FixedDetector key, light;
  const auto cfg = small_config(16, false);
  const auto a = run_pipeline(FlatFrames(6, {90, 160}), key, light, cfg);
  const auto b = run_pipeline(FlatFrames(4, {90, 160}), key, light, cfg);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(a.frames[i].grid_id, b.frames[i].grid_id);
}

TEST(Playback, NoiseFreeReturnsStoredBoxes) {
  const std::map<int, std::vector<Detection>> ann{{0, {{{1, 2, 30, 40}, 0.9}}}};
  EXPECT_EQ(playback_detector(ann, 0), ann.at(0));
  EXPECT_TRUE(playback_detector(ann, 7).empty());
}

TEST(Playback, FullDropRateEmpties) {
  const std::map<int, std::vector<Detection>> ann{{0, {{{1, 2, 30, 40}, 0.9}, {{5, 5, 9, 9}, 0.8}}}};
  EXPECT_TRUE(playback_detector(ann, 0, {0.0, 1.0}, 3).empty());
}

TEST(Playback, JitterIsSeedDeterministic) {
  const std::map<int, std::vector<Detection>> ann{{4, {{{100, 100, 200, 150}, 0.9}, {{10, 10, 40, 30}, 0.7}}}};
  const PlaybackNoise noise{2.0, 0.0};
  const auto a = playback_detector(ann, 4, noise, 77);
  const auto b = playback_detector(ann, 4, noise, 77);
  const auto c = playback_detector(ann, 4, noise, 78);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, ann.at(4));
  EXPECT_LE(std::abs(a[0].box.x_min - 100), 2.0);
}

TEST(ExternalDetector, ParsesFixedOutput) {
  const auto dets = external_detector((kData / "fixed_detector.sh").string() + " {input}", kData / "fixed_detector.sh");
  ASSERT_EQ(dets.size(), 2u);
  EXPECT_EQ(dets[0].box, (BoundingBox{10.5, 20, 40.5, 60}));
  EXPECT_EQ(dets[0].score, 0.75);
  EXPECT_EQ(dets[0].category, 2);
}

TEST(ExternalDetector, MalformedOutputIsDetectorError) {
  EXPECT_THROW(external_detector((kData / "malformed_detector.sh").string(), "x"), DetectorError);
}

TEST(ExternalDetector, NonzeroExitIsDetectorError) {
  try {
    external_detector((kData / "failing_detector.sh").string(), "x");
    FAIL();
  } catch (const DetectorError& e) {
    EXPECT_NE(std::string(e.what()).find("model not found"), std::string::npos);
  }
}

TEST(ExternalDetector, TimeoutIsDetectorError) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    external_detector((kData / "slow_detector.sh").string(), "x", std::chrono::milliseconds(200));
    FAIL();
  } catch (const DetectorError& e) {
    EXPECT_NE(std::string(e.what()).find("timeout"), std::string::npos);
  }
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
}

TEST(ExternalDetector, MissingProgramIsDetectorError) {
  EXPECT_THROW(external_detector("/nonexistent/detector {input}", "x"), DetectorError);
}

TEST(ExternalDetector, RunsInsidePipelineOnWrittenFrames) {
  const auto scratch = fs::temp_directory_path() / "salisa_ext_test";
  ExternalDetector key((kData / "fixed_detector.sh").string() + " {input}", std::chrono::seconds(5), scratch);
  NullDetector light;
  const auto r = run_pipeline(FlatFrames(1, {90, 160}), key, light, small_config(16, true));
  EXPECT_FALSE(r.frames[0].failed) << r.frames[0].error;
  EXPECT_EQ(r.frames[0].detections.size(), 2u);
  fs::remove_all(scratch);
}

TEST(ExpandArgv, QuotesAndPlaceholder) {
  const auto a = expand_argv(R"(det --in {input} "two words" x={input})", "/f.ppm");
  const std::vector<std::string> expected{"det", "--in", "/f.ppm", "two words", "x=/f.ppm"};
  EXPECT_EQ(a, expected);
  EXPECT_THROW(expand_argv("\"open", "x"), ConfigError);
}

TEST(KnownCosts, Table) {
  EXPECT_EQ(*known_cost_gflops("efficientdet-d0"), 1.36);
  EXPECT_EQ(*known_cost_gflops("efficientdet-d1"), 3.20);
  EXPECT_EQ(*known_cost_gflops("salisa-sampler"), 0.06);
  EXPECT_FALSE(known_cost_gflops("yolo").has_value());
}

TEST(Synthetic, DeterministicFramesAndMixedSizes) {
  SyntheticSpec spec;
  spec.frames = 4;
  const SyntheticSequence a(spec), b(spec);
  EXPECT_EQ(a.frame(3), b.frame(3));
  EXPECT_EQ(a.annotations(), b.annotations());
  const auto map = generate_saliency(a.annotations().detections_for(0), spec.size, {});
  EXPECT_EQ(map_composition(map, {}), MapComposition::Mixed);
}
