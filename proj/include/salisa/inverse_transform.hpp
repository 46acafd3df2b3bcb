#pragma once

#include <span>
#include <vector>

#include "salisa/core_types.hpp"

namespace salisa {

enum class GridInterpolation {
  /// Four surrounding grid nodes, linear in both axes.
  Bilinear,
  /// Literal per-axis reading: x interpolated between the two closest
  /// columns on the nearest row, y between the two closest rows on the
  /// nearest column.
  PerAxis,
};

struct InvertedPoint {
  PixelCoord point;
  /// q was outside the resampled image and was clamped to its boundary.
  bool clamped = false;
};

/// Maps a resampled-image pixel position to original-image pixels by
/// interpolating the grid at q.
InvertedPoint invert_point(PixelCoord q, const SamplingGrid& grid, Extent original,
                           GridInterpolation mode = GridInterpolation::Bilinear);

/// Source coordinate of the grid at fractional grid position q (x = column).
NormCoord sample_grid(const SamplingGrid& grid, PixelCoord q, GridInterpolation mode = GridInterpolation::Bilinear);

struct ForwardPoint {
  PixelCoord point;
  bool converged = false;
};

/// Resampled-image position whose grid value is the original-image point p,
/// i.e. the inverse of invert_point(). Nearest-node search followed by Newton
/// iterations on the bilinear interpolant, with a per-cell scan when that
/// stalls. Points outside the grid's image come back unconverged, at the
/// closest position found.
ForwardPoint forward_point(PixelCoord p, const SamplingGrid& grid, Extent original);

struct InversionResult {
  std::vector<Detection> detections;
  /// Boxes whose mapped hull was empty after clamping to the image.
  int dropped = 0;
};

/// Maps Resampled-space detections to Original space through the grid that
/// produced them: corners inverted, axis-aligned hull, clamped to the image.
/// Throws GridMismatch when a detection's grid id differs from the grid.
InversionResult invert_detections(std::span<const Detection> dets, const SamplingGrid& grid, Extent original,
                                  GridInterpolation mode = GridInterpolation::Bilinear);

/// Opposite direction: Original-space detections into the resampled frame.
InversionResult forward_detections(std::span<const Detection> dets, const SamplingGrid& grid, Extent original);

}  // namespace salisa
