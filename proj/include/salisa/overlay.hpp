#pragma once

#include <array>
#include <span>

#include "salisa/core_types.hpp"

namespace salisa {

struct OverlayStyle {
  /// Every grid_step-th grid row and column is drawn (plus the last one).
  int grid_step = 8;
  std::array<float, 3> grid_color{0.1f, 1.0f, 0.2f};
  std::array<float, 3> box_color{1.0f, 0.15f, 0.1f};
};

/// Static diagnostic rendering: the deformation field as the source-space
/// polylines of the grid's rows and columns, and detection boxes, drawn over
/// an RGB copy of the image. Either overlay may be omitted.
ImageBuffer render_overlay(const ImageBuffer& image, const SamplingGrid* grid, std::span<const Detection> detections,
                           const OverlayStyle& style = {});

}  // namespace salisa
