#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "salisa/attention_sampler.hpp"
#include "salisa/core_types.hpp"
#include "salisa/detectors.hpp"
#include "salisa/grid_fit.hpp"
#include "salisa/saliency.hpp"

namespace salisa {

/// Ordered, random-access frames of one video.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int size() const = 0;
  virtual Extent extent() const = 0;
  virtual ImageBuffer frame(int index) const = 0;
};

/// Image files of a directory (.png, .ppm, .pgm) in filename order.
class ImageSequence final : public FrameSource {
 public:
  explicit ImageSequence(const std::filesystem::path& dir);

  int size() const override { return static_cast<int>(files_.size()); }
  Extent extent() const override { return extent_; }
  ImageBuffer frame(int index) const override;
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
  Extent extent_;
};

struct ScheduleConfig {
  /// Key frames at indices divisible by this.
  int keyframe_interval = 16;
  /// Even-indexed non-key frames copy the previous frame's detections.
  bool propagate_odd_frames = true;
  /// Size of the warped frame fed to the light detector.
  Extent resampled_size{360, 640};

  void validate() const;
};

struct CostTable {
  double key_gflops = 3.20;
  double light_gflops = 1.36;
  /// Resampling module, charged on every resampled frame.
  double sampler_gflops = 0.06;
};

struct PipelineConfig {
  SaliencyConfig saliency;
  AttentionSamplerConfig sampler;
  FitConfig fit;
  ScheduleConfig schedule;
  CostTable costs;
};

enum class FrameRole { Key, Resampled, Propagated };

const char* to_string(FrameRole r);

struct FrameRecord {
  int index = 0;
  FrameRole role = FrameRole::Key;
  /// Original-space detections.
  std::vector<Detection> detections;
  double cost_gflops = 0.0;
  /// Fingerprint of the sampling grid (resampled frames only).
  std::optional<std::uint64_t> grid_id;
  bool failed = false;
  std::string error;
  /// Resampled frames: inverted boxes dropped as degenerate.
  int dropped = 0;
  /// Resampled frames: saliency composition and fit loss (empty when the
  /// identity fallback was used).
  std::optional<MapComposition> composition;
  std::optional<double> fit_loss;
  std::optional<std::size_t> folds;
};

struct PipelineSummary {
  int frames = 0;
  int key_frames = 0;
  int resampled_frames = 0;
  int propagated_frames = 0;
  int failed_frames = 0;
  double total_gflops = 0.0;
  /// (key_frames * C_key + resampled_frames * (C_light + C_sampler)) / frames.
  double mean_gflops = 0.0;
};

struct PipelineResult {
  std::vector<FrameRecord> frames;
  PipelineSummary summary;
};

/// Role of frame index under the schedule (pure function of the index).
FrameRole scheduled_role(int index, const ScheduleConfig& schedule);

/// Closed-form mean per-frame cost for a schedule over frame_count frames.
double expected_mean_gflops(int frame_count, const ScheduleConfig& schedule, const CostTable& costs);

/// Runs the key-frame / resampled / propagated schedule over frames.
///
/// Key frames go to key_detector at full resolution. A resampled frame builds
/// its saliency map from the previous frame's Original-space detections, fits
/// a sampling grid, warps the frame to schedule.resampled_size, runs
/// light_detector and inverts its boxes. Propagated frames copy the previous
/// detections at zero cost. A detector error marks the frame failed; the
/// next resampled frame then uses an identity grid.
PipelineResult run_pipeline(const FrameSource& frames, Detector& key_detector, Detector& light_detector,
                            const PipelineConfig& config,
                            const std::function<void(const FrameRecord&)>& on_frame = {});

}  // namespace salisa
