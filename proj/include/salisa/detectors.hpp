#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "salisa/core_types.hpp"

namespace salisa {

enum class DetectorKind { AnnotationPlayback, ExternalCommand, Null };

const char* to_string(DetectorKind k);

/// Seed-deterministic degradation applied by the playback detector.
struct PlaybackNoise {
  /// Each box edge moves by up to this percentage of the box extent.
  double jitter_pct = 0.0;
  /// Probability of dropping a stored box.
  double drop_rate = 0.0;
};

struct DetectorSpec {
  std::string name;
  DetectorKind kind = DetectorKind::Null;
  /// Annotation file for playback, argv template for external commands.
  std::string source;
  double cost_gflops = 0.0;
  PlaybackNoise noise;
  double timeout_s = 30.0;

  void validate() const;
};

/// Per-frame GFLOPs of well-known detectors at UA-DETRAC input
/// resolution, plus the resampling module.
std::optional<double> known_cost_gflops(const std::string& name);

struct DetectorRequest {
  const ImageBuffer& frame;
  int frame_index = 0;
  /// Size of the full-resolution frame.
  Extent original;
  /// Set when frame was resampled through this grid; detections are then
  /// reported in the grid's Resampled space.
  const SamplingGrid* grid = nullptr;
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<Detection> detect(const DetectorRequest& request) = 0;
};

class NullDetector final : public Detector {
 public:
  std::vector<Detection> detect(const DetectorRequest&) override { return {}; }
};

/// Replays stored Original-space annotations, keyed by frame index.
class PlaybackDetector final : public Detector {
 public:
  PlaybackDetector(std::map<int, std::vector<Detection>> annotations, PlaybackNoise noise = {},
                   std::uint64_t seed = 0);

  std::vector<Detection> detect(const DetectorRequest& request) override;

 private:
  std::map<int, std::vector<Detection>> annotations_;
  PlaybackNoise noise_;
  std::uint64_t seed_;
};

/// Stored detections for a frame after noise, in Original space. Missing
/// frames yield an empty list. Noise draws depend only on (seed, frame).
std::vector<Detection> playback_detector(const std::map<int, std::vector<Detection>>& annotations, int frame_index,
                                         const PlaybackNoise& noise = {}, std::uint64_t seed = 0);

/// Runs argv_template with "{input}" replaced by image_path and parses
/// detection JSON from its standard output. Throws DetectorError on a
/// nonzero exit, a parse failure or a timeout.
std::vector<Detection> external_detector(const std::string& argv_template, const std::filesystem::path& image_path,
                                         std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// Writes the frame to a scratch image and calls external_detector().
class ExternalDetector final : public Detector {
 public:
  ExternalDetector(std::string argv_template, std::chrono::milliseconds timeout, std::filesystem::path scratch_dir);

  std::vector<Detection> detect(const DetectorRequest& request) override;

 private:
  std::string argv_template_;
  std::chrono::milliseconds timeout_;
  std::filesystem::path scratch_dir_;
};

/// Builds the detector described by spec. Playback sources are read
/// relative to base_dir.
std::unique_ptr<Detector> make_detector(const DetectorSpec& spec, std::uint64_t seed,
                                        const std::filesystem::path& base_dir = {},
                                        const std::filesystem::path& scratch_dir = std::filesystem::temp_directory_path());

/// Splits a command template into argv (whitespace separated, double quotes
/// group) and substitutes {input}.
std::vector<std::string> expand_argv(const std::string& argv_template, const std::string& input);

}  // namespace salisa
