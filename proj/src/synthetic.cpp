#include "salisa/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "salisa/errors.hpp"

namespace salisa {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Position of a point moving at constant speed inside [0, span], reflecting
// at both ends.
double bounce(double start, double velocity, int t, double span) {
  if (span <= 0.0) return 0.0;
  double p = std::fmod(start + velocity * t, 2.0 * span);
  if (p < 0.0) p += 2.0 * span;
  return p <= span ? p : 2.0 * span - p;
}

}  // namespace

SyntheticSequence::SyntheticSequence(SyntheticSpec spec) : spec_(spec) {
  if (spec_.frames < 1 || spec_.size.height < 16 || spec_.size.width < 16 || spec_.objects < 0) {
    throw InvalidInput("synthetic sequence needs >= 1 frame, >= 16x16 pixels and >= 0 objects");
  }
  std::mt19937_64 rng(spec_.seed);
  const double W = spec_.size.width - 1.0;
  const double H = spec_.size.height - 1.0;
  for (int k = 0; k < spec_.objects; ++k) {
    Object o{};
    // Alternate small (well under 0.5% of the frame) and large objects.
    const double frac = k % 2 == 0 ? 0.03 + 0.03 * unit(rng) : 0.12 + 0.1 * unit(rng);
    o.w = std::max(4.0, std::round(frac * W));
    o.h = std::max(4.0, std::round(frac * H * (0.8 + 0.4 * unit(rng))));
    o.x = unit(rng) * (W - o.w);
    o.y = unit(rng) * (H - o.h);
    o.vx = (unit(rng) * 2.0 - 1.0) * 0.006 * W;
    o.vy = (unit(rng) * 2.0 - 1.0) * 0.006 * H;
    o.r = static_cast<float>(0.2 + 0.8 * unit(rng));
    o.g = static_cast<float>(0.2 + 0.8 * unit(rng));
    o.b = static_cast<float>(0.2 + 0.8 * unit(rng));
    o.category = k % 3;
    objects_.push_back(o);
  }

  for (int f = 0; f < spec_.frames; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.ppm", f);
    annotations_.images.push_back({f, name, spec_.size.width, spec_.size.height});
    for (const auto& o : objects_) {
      annotations_.detections.push_back({f, Detection{box_at(o, f), 0.9, o.category, CoordinateSpace::original()}});
    }
  }
}

BoundingBox SyntheticSequence::box_at(const Object& o, int index) const {
  const double x = std::round(bounce(o.x, o.vx, index, spec_.size.width - 1.0 - o.w));
  const double y = std::round(bounce(o.y, o.vy, index, spec_.size.height - 1.0 - o.h));
  return {x, y, x + o.w, y + o.h};
}

ImageBuffer SyntheticSequence::frame(int index) const {
  if (index < 0 || index >= spec_.frames) throw InvalidInput("synthetic frame index out of range");
  const int h = spec_.size.height;
  const int w = spec_.size.width;
  std::vector<float> px(static_cast<std::size_t>(h) * w * 3);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      float* p = px.data() + (static_cast<std::size_t>(r) * w + c) * 3;
      const float checker = ((r / 24 + c / 24) % 2) ? 0.05f : 0.0f;
      p[0] = 0.25f + 0.2f * static_cast<float>(c) / w + checker;
      p[1] = 0.3f + 0.2f * static_cast<float>(r) / h + checker;
      p[2] = 0.35f + checker;
    }
  }
  for (const auto& o : objects_) {
    const BoundingBox b = box_at(o, index);
    for (int r = static_cast<int>(b.y_min); r < static_cast<int>(b.y_max); ++r) {
      for (int c = static_cast<int>(b.x_min); c < static_cast<int>(b.x_max); ++c) {
        float* p = px.data() + (static_cast<std::size_t>(r) * w + c) * 3;
        p[0] = o.r;
        p[1] = o.g;
        p[2] = o.b;
      }
    }
  }
  return ImageBuffer(h, w, 3, std::move(px));
}

}  // namespace salisa
