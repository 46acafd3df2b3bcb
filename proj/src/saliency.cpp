#include "salisa/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "salisa/errors.hpp"

namespace salisa {

void SaliencyConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0,1]");
  if (!(alpha_pct > 0.0) || !std::isfinite(alpha_pct)) throw ConfigError("alpha_pct must be positive");
  if (!(background_label >= 0.0f && background_label < large_label && large_label < small_label &&
        small_label <= 1.0f)) {
    throw ConfigError("labels must satisfy 0 <= background < large < small <= 1");
  }
  if (out_size.height < 1 || out_size.width < 1) throw ConfigError("saliency out_size must be positive");
}

ObjectSizeClass classify_size(const Detection& d, Extent image, const SaliencyConfig& cfg) {
  validate(d);
  if (d.space.kind != SpaceKind::Original) throw InvalidInput("classify_size expects an Original-space detection");
  const double threshold = cfg.alpha_pct / 100.0 * static_cast<double>(image.area());
  return d.box.area() < threshold ? ObjectSizeClass::Small : ObjectSizeClass::Large;
}

namespace {

// Half-open range of cell indices whose centers fall in [lo, hi) once the
// pixel interval is mapped into cell units.
std::pair<int, int> covered_cells(double lo_px, double hi_px, int image_len, int cells) {
  const double scale = static_cast<double>(cells) / (image_len - 1);
  const double lo = lo_px * scale;
  const double hi = hi_px * scale;
  // center c = j + 0.5 is inside iff lo <= c < hi
  int first = static_cast<int>(std::ceil(lo - 0.5));
  int last = static_cast<int>(std::ceil(hi - 0.5));
  first = std::clamp(first, 0, cells);
  last = std::clamp(last, 0, cells);
  return {first, last};
}

}  // namespace

SaliencyMap generate_saliency(std::span<const Detection> dets, Extent image, const SaliencyConfig& cfg) {
  cfg.validate();
  if (image.height < 2 || image.width < 2) throw DimensionError("image must be at least 2x2");
  const int h = cfg.out_size.height;
  const int w = cfg.out_size.width;
  std::vector<float> values(static_cast<std::size_t>(h) * w, cfg.background_label);

  for (const auto& d : dets) {
    if (d.space.kind != SpaceKind::Original) {
      throw InvalidInput("generate_saliency expects Original-space detections");
    }
    if (!(d.score >= cfg.tau)) continue;
    const float label = classify_size(d, image, cfg) == ObjectSizeClass::Small ? cfg.small_label : cfg.large_label;
    const auto [c0, c1] = covered_cells(d.box.x_min, d.box.x_max, image.width, w);
    const auto [r0, r1] = covered_cells(d.box.y_min, d.box.y_max, image.height, h);
    for (int r = r0; r < r1; ++r) {
      float* row = values.data() + static_cast<std::size_t>(r) * w;
      for (int c = c0; c < c1; ++c) row[c] = std::max(row[c], label);
    }
  }
  return SaliencyMap(h, w, std::move(values));
}

MapComposition map_composition(const SaliencyMap& map, const SaliencyConfig& cfg) {
  bool small = false;
  bool large = false;
  for (float v : map.values()) {
    small = small || v == cfg.small_label;
    large = large || v == cfg.large_label;
  }
  if (small && large) return MapComposition::Mixed;
  if (small) return MapComposition::OnlySmall;
  if (large) return MapComposition::OnlyLarge;
  return MapComposition::Empty;
}

const char* to_string(MapComposition c) {
  switch (c) {
    case MapComposition::Empty: return "empty";
    case MapComposition::OnlySmall: return "only_small";
    case MapComposition::OnlyLarge: return "only_large";
    case MapComposition::Mixed: return "mixed";
  }
  return "unknown";
}

}  // namespace salisa
