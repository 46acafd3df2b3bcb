#include "salisa/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "salisa/errors.hpp"

namespace salisa {

namespace {

class Canvas {
 public:
  explicit Canvas(const ImageBuffer& image)
      : h_(image.height()), w_(image.width()), px_(static_cast<std::size_t>(h_) * w_ * 3) {
    for (int r = 0; r < h_; ++r) {
      for (int c = 0; c < w_; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          px_[(static_cast<std::size_t>(r) * w_ + c) * 3 + ch] = image.at(r, c, image.channels() == 3 ? ch : 0);
        }
      }
    }
  }

  void plot(int x, int y, const std::array<float, 3>& color) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    std::copy(color.begin(), color.end(), px_.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(y) * w_ + x) * 3));
  }

  void line(PixelCoord a, PixelCoord b, const std::array<float, 3>& color) {
    const double steps = std::ceil(std::max(std::abs(b.x - a.x), std::abs(b.y - a.y)));
    const int n = std::max(1, static_cast<int>(steps));
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      plot(static_cast<int>(std::lround(a.x + (b.x - a.x) * t)), static_cast<int>(std::lround(a.y + (b.y - a.y) * t)),
           color);
    }
  }

  ImageBuffer finish() && { return ImageBuffer(h_, w_, 3, std::move(px_)); }

 private:
  int h_;
  int w_;
  std::vector<float> px_;
};

std::vector<int> stepped(int n, int step) {
  std::vector<int> out;
  for (int k = 0; k < n; k += step) out.push_back(k);
  if (out.back() != n - 1) out.push_back(n - 1);
  return out;
}

}  // namespace

ImageBuffer render_overlay(const ImageBuffer& image, const SamplingGrid* grid, std::span<const Detection> detections,
                           const OverlayStyle& style) {
  if (style.grid_step < 1) throw InvalidInput("grid_step must be >= 1");
  Canvas canvas(image);
  const Extent e = image.extent();
  if (grid) {
    auto src = [&](int r, int c) { return norm_to_pixel(grid->at(r, c), e); };
    for (int r : stepped(grid->height(), style.grid_step)) {
      for (int c = 1; c < grid->width(); ++c) canvas.line(src(r, c - 1), src(r, c), style.grid_color);
    }
    for (int c : stepped(grid->width(), style.grid_step)) {
      for (int r = 1; r < grid->height(); ++r) canvas.line(src(r - 1, c), src(r, c), style.grid_color);
    }
  }
  for (const auto& d : detections) {
    const auto& b = d.box;
    canvas.line({b.x_min, b.y_min}, {b.x_max, b.y_min}, style.box_color);
    canvas.line({b.x_max, b.y_min}, {b.x_max, b.y_max}, style.box_color);
    canvas.line({b.x_max, b.y_max}, {b.x_min, b.y_max}, style.box_color);
    canvas.line({b.x_min, b.y_max}, {b.x_min, b.y_min}, style.box_color);
  }
  return std::move(canvas).finish();
}

}  // namespace salisa
