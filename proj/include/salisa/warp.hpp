#pragma once

#include "salisa/core_types.hpp"

namespace salisa {

/// Samples src at every grid coordinate with bilinear interpolation and
/// clamp-to-edge borders. Output has the grid's dimensions.
ImageBuffer warp_image(const ImageBuffer& src, const SamplingGrid& grid);

/// warp_image for a single-channel saliency map; output clamped to [0,1].
SaliencyMap warp_saliency(const SaliencyMap& src, const SamplingGrid& grid);

}  // namespace salisa
