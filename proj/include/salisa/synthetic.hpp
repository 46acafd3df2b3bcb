#pragma once

#include <cstdint>

#include "salisa/io/detection_file.hpp"
#include "salisa/pipeline.hpp"

namespace salisa {

struct SyntheticSpec {
  int frames = 64;
  Extent size{360, 640};
  int objects = 6;
  std::uint64_t seed = 1;
};

/// Deterministic moving-rectangle sequence with exact ground-truth boxes.
/// Objects move linearly and bounce off the borders; a mix of small and
/// large objects is generated so both saliency levels occur.
class SyntheticSequence final : public FrameSource {
 public:
  explicit SyntheticSequence(SyntheticSpec spec);

  int size() const override { return spec_.frames; }
  Extent extent() const override { return spec_.size; }
  ImageBuffer frame(int index) const override;

  /// One image entry per frame (id = index, file = frame_XXXX.ppm).
  const io::DetectionFile& annotations() const { return annotations_; }

 private:
  struct Object {
    double x, y, w, h, vx, vy;
    float r, g, b;
    int category;
  };
  BoundingBox box_at(const Object& o, int index) const;

  SyntheticSpec spec_;
  std::vector<Object> objects_;
  io::DetectionFile annotations_;
};

}  // namespace salisa
