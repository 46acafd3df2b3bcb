#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace salisa {

/// Image extent in pixels.
struct Extent {
  int height = 0;
  int width = 0;

  friend bool operator==(const Extent&, const Extent&) = default;
  std::int64_t area() const { return std::int64_t{height} * width; }
};

/// Position in normalized image space. (-1,-1) is the center of the top-left
/// pixel and (1,1) the center of the bottom-right pixel (corner-aligned).
struct NormCoord {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const NormCoord&, const NormCoord&) = default;
};

/// Position in pixel units; integer values are pixel centers.
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

NormCoord pixel_to_norm(PixelCoord p, int height, int width);
PixelCoord norm_to_pixel(NormCoord q, int height, int width);

inline NormCoord pixel_to_norm(PixelCoord p, Extent e) { return pixel_to_norm(p, e.height, e.width); }
inline PixelCoord norm_to_pixel(NormCoord q, Extent e) { return norm_to_pixel(q, e.height, e.width); }

/// Row-major scalar field in [0,1].
class SaliencyMap {
 public:
  SaliencyMap(int height, int width, float fill = 0.0f);
  SaliencyMap(int height, int width, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  Extent extent() const { return {height_, width_}; }
  float at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const float> values() const { return values_; }

 private:
  int height_;
  int width_;
  std::vector<float> values_;
};

/// Dense field of source coordinates, one per output pixel.
class SamplingGrid {
 public:
  SamplingGrid(int height, int width, std::vector<NormCoord> coords, bool clamped = false);

  int height() const { return height_; }
  int width() const { return width_; }
  Extent extent() const { return {height_, width_}; }
  /// True if any raw coordinate fell outside [-1,1] and was clamped.
  bool clamped() const { return clamped_; }
  const NormCoord& at(int row, int col) const { return coords_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const NormCoord> coords() const { return coords_; }

 private:
  int height_;
  int width_;
  std::vector<NormCoord> coords_;
  bool clamped_;
};

SamplingGrid identity_grid(int height, int width);

/// Content hash of a grid; detections in resampled space carry it so they can
/// only be inverted through the grid that produced them.
std::uint64_t grid_fingerprint(const SamplingGrid& grid);

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class SpaceKind { Original, Resampled };

struct CoordinateSpace {
  SpaceKind kind = SpaceKind::Original;
  std::uint64_t grid_id = 0;

  static CoordinateSpace original() { return {}; }
  static CoordinateSpace resampled(std::uint64_t id) { return {SpaceKind::Resampled, id}; }
  friend bool operator==(const CoordinateSpace&, const CoordinateSpace&) = default;
};

struct Detection {
  BoundingBox box;
  double score = 1.0;
  int category = 0;
  CoordinateSpace space;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Ordered, finite box and score in [0,1].
bool is_valid(const Detection& d);
/// Throws InvalidBox if !is_valid(d).
void validate(const Detection& d);

/// Interleaved float image with values in [0,1].
class ImageBuffer {
 public:
  ImageBuffer(int height, int width, int channels, float fill = 0.0f);
  ImageBuffer(int height, int width, int channels, std::vector<float> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  Extent extent() const { return {height_, width_}; }
  float at(int row, int col, int ch = 0) const {
    return pixels_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + ch];
  }
  std::span<const float> pixels() const { return pixels_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int height_;
  int width_;
  int channels_;
  std::vector<float> pixels_;
};

}  // namespace salisa
