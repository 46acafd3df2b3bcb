#pragma once

#include <span>

#include "salisa/core_types.hpp"

namespace salisa {

struct SaliencyConfig {
  /// Detections with score >= tau are rasterized.
  double tau = 0.5;
  /// Area threshold as a percentage of the image area; smaller boxes are "small".
  double alpha_pct = 0.5;
  float small_label = 1.0f;
  float large_label = 0.5f;
  float background_label = 0.0f;
  Extent out_size{128, 128};

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

enum class ObjectSizeClass { Small, Large };

/// Small iff box area < alpha_pct/100 of the image area. Exact ties are Large.
ObjectSizeClass classify_size(const Detection& d, Extent image, const SaliencyConfig& cfg);

/// Rasterizes thresholded detections directly at cfg.out_size.
///
/// The map's cells partition [-1,1]^2 uniformly: cell j spans normalized
/// x in [-1 + 2j/n, -1 + 2(j+1)/n). A cell is covered by a box when its
/// center lies in the half-open box [x_min, x_max) x [y_min, y_max) after the
/// box corners are mapped to cell units. Overlaps take the maximum label.
SaliencyMap generate_saliency(std::span<const Detection> dets, Extent image, const SaliencyConfig& cfg);

enum class MapComposition { Empty, OnlySmall, OnlyLarge, Mixed };

MapComposition map_composition(const SaliencyMap& map, const SaliencyConfig& cfg);

const char* to_string(MapComposition c);

}  // namespace salisa
