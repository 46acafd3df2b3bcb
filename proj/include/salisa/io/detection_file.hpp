#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "salisa/core_types.hpp"

namespace salisa::io {

struct ImageEntry {
  int id = 0;
  std::string file;
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageEntry&, const ImageEntry&) = default;
};

struct DetectionEntry {
  int image_id = 0;
  Detection detection;

  friend bool operator==(const DetectionEntry&, const DetectionEntry&) = default;
};

/// COCO-style interchange document:
///   {"images": [{"id", "file", "width", "height"}],
///    "detections": [{"image_id", "bbox": [x, y, w, h], "score", "category_id"}]}
/// Detections may also carry "space": "resampled" with a hex "grid_id".
struct DetectionFile {
  std::vector<ImageEntry> images;
  std::vector<DetectionEntry> detections;

  std::vector<Detection> detections_for(int image_id) const;
  std::vector<Detection> all_detections() const;
  const ImageEntry* find_image(int id) const;

  friend bool operator==(const DetectionFile&, const DetectionFile&) = default;
};

/// With require_images, every image_id must name an entry of "images".
DetectionFile parse_detection_file(std::string_view text, bool require_images = true);
std::string serialize(const DetectionFile& file);

DetectionFile read_detection_file(const std::filesystem::path& path, bool require_images = true);
void write_detection_file(const std::filesystem::path& path, const DetectionFile& file);

/// 16-digit lowercase hex form used for grid ids in JSON.
std::string format_grid_id(std::uint64_t id);

/// Frame index (position in "images") -> Original-space detections.
std::map<int, std::vector<Detection>> detections_by_frame(const DetectionFile& file);

}  // namespace salisa::io
