#include "salisa/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "salisa/errors.hpp"
#include "salisa/inverse_transform.hpp"
#include "salisa/io/image_io.hpp"
#include "salisa/warp.hpp"

namespace salisa {

ImageSequence::ImageSequence(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError("frame directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") files_.push_back(entry.path());
  }
  std::sort(files_.begin(), files_.end());
  if (files_.empty()) throw FormatError("no .png/.ppm/.pgm frames in " + dir.string());
  extent_ = io::read_image(files_.front()).extent();
}

ImageBuffer ImageSequence::frame(int index) const {
  ImageBuffer img = io::read_image(files_.at(static_cast<std::size_t>(index)));
  if (img.extent() != extent_) throw FormatError("frame " + files_[index].string() + " has a different size");
  return img;
}

void ScheduleConfig::validate() const {
  if (keyframe_interval < 1) throw ConfigError("keyframe_interval must be >= 1");
  if (resampled_size.height < 2 || resampled_size.width < 2) throw ConfigError("resampled_size must be at least 2x2");
}

const char* to_string(FrameRole r) {
  switch (r) {
    case FrameRole::Key: return "key";
    case FrameRole::Resampled: return "resampled";
    case FrameRole::Propagated: return "propagated";
  }
  return "unknown";
}

FrameRole scheduled_role(int index, const ScheduleConfig& schedule) {
  if (index % schedule.keyframe_interval == 0) return FrameRole::Key;
  if (schedule.propagate_odd_frames && index % 2 == 0) return FrameRole::Propagated;
  return FrameRole::Resampled;
}

double expected_mean_gflops(int frame_count, const ScheduleConfig& schedule, const CostTable& costs) {
  int keys = 0;
  int resampled = 0;
  for (int i = 0; i < frame_count; ++i) {
    const FrameRole role = scheduled_role(i, schedule);
    keys += role == FrameRole::Key;
    resampled += role == FrameRole::Resampled;
  }
  return (keys * costs.key_gflops + resampled * (costs.light_gflops + costs.sampler_gflops)) / frame_count;
}

PipelineResult run_pipeline(const FrameSource& frames, Detector& key_detector, Detector& light_detector,
                            const PipelineConfig& config, const std::function<void(const FrameRecord&)>& on_frame) {
  config.schedule.validate();
  config.saliency.validate();
  config.sampler.validate();
  config.fit.validate();
  const int count = frames.size();
  if (count < 1) throw InvalidInput("pipeline needs at least one frame");
  const Extent original = frames.extent();
  const Extent resampled = config.schedule.resampled_size;

  PipelineResult result;
  result.frames.reserve(static_cast<std::size_t>(count));
  PipelineSummary& summary = result.summary;

  for (int index = 0; index < count; ++index) {
    FrameRecord record;
    record.index = index;
    record.role = scheduled_role(index, config.schedule);
    const FrameRecord* previous = index > 0 ? &result.frames.back() : nullptr;

    try {
      switch (record.role) {
        case FrameRole::Key: {
          record.cost_gflops = config.costs.key_gflops;
          const ImageBuffer frame = frames.frame(index);
          record.detections = key_detector.detect({frame, index, original, nullptr});
          for (const auto& d : record.detections) validate(d);
          break;
        }
        case FrameRole::Propagated:
          record.detections = previous->detections;
          break;
        case FrameRole::Resampled: {
          record.cost_gflops = config.costs.light_gflops + config.costs.sampler_gflops;
          const ImageBuffer frame = frames.frame(index);
          std::optional<SamplingGrid> grid;
          if (previous->failed) {
            grid = identity_grid(resampled.height, resampled.width);
          } else {
            const SaliencyMap map = generate_saliency(previous->detections, original, config.saliency);
            SaliencyGridResult fitted = saliency_to_grid(map, config.fit, config.sampler, config.saliency, resampled);
            record.composition = fitted.composition;
            record.fit_loss = fitted.fit.loss;
            record.folds = fitted.folds;
            grid = std::move(fitted.grid);
          }
          record.grid_id = grid_fingerprint(*grid);
          const ImageBuffer warped = warp_image(frame, *grid);
          const auto dets = light_detector.detect({warped, index, original, &*grid});
          InversionResult inverted = invert_detections(dets, *grid, original);
          record.detections = std::move(inverted.detections);
          record.dropped = inverted.dropped;
          break;
        }
      }
    } catch (const Error& e) {
      record.failed = true;
      record.error = e.what();
      record.detections.clear();
    }

    summary.key_frames += record.role == FrameRole::Key;
    summary.resampled_frames += record.role == FrameRole::Resampled;
    summary.propagated_frames += record.role == FrameRole::Propagated;
    summary.failed_frames += record.failed;
    if (on_frame) on_frame(record);
    result.frames.push_back(std::move(record));
  }

  summary.frames = count;
  summary.total_gflops = summary.key_frames * config.costs.key_gflops +
                         summary.resampled_frames * (config.costs.light_gflops + config.costs.sampler_gflops);
  summary.mean_gflops = summary.total_gflops / count;
  return result;
}

}  // namespace salisa
