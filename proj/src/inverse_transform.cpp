#include "salisa/inverse_transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "salisa/errors.hpp"

namespace salisa {

namespace {

struct Cell {
  int c0, c1, r0, r1;
  double tx, ty;
};

Cell locate(const SamplingGrid& grid, PixelCoord q) {
  const int w = grid.width();
  const int h = grid.height();
  const int c0 = std::clamp(static_cast<int>(std::floor(q.x)), 0, std::max(w - 2, 0));
  const int r0 = std::clamp(static_cast<int>(std::floor(q.y)), 0, std::max(h - 2, 0));
  const int c1 = std::min(c0 + 1, w - 1);
  const int r1 = std::min(r0 + 1, h - 1);
  return {c0, c1, r0, r1, q.x - c0, q.y - r0};
}

NormCoord lerp(const NormCoord& a, const NormCoord& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

BoundingBox hull(const std::array<PixelCoord, 4>& pts) {
  BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : pts) {
    b.x_min = std::min(b.x_min, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.x_max = std::max(b.x_max, p.x);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

BoundingBox clamp_box(BoundingBox b, Extent e) {
  b.x_min = std::clamp(b.x_min, 0.0, e.width - 1.0);
  b.x_max = std::clamp(b.x_max, 0.0, e.width - 1.0);
  b.y_min = std::clamp(b.y_min, 0.0, e.height - 1.0);
  b.y_max = std::clamp(b.y_max, 0.0, e.height - 1.0);
  return b;
}

std::array<PixelCoord, 4> corners(const BoundingBox& b) {
  return {PixelCoord{b.x_min, b.y_min}, PixelCoord{b.x_max, b.y_min}, PixelCoord{b.x_min, b.y_max},
          PixelCoord{b.x_max, b.y_max}};
}

}  // namespace

NormCoord sample_grid(const SamplingGrid& grid, PixelCoord q, GridInterpolation mode) {
  const Cell c = locate(grid, q);
  if (mode == GridInterpolation::PerAxis) {
    const int row = c.ty < 0.5 ? c.r0 : c.r1;
    const int col = c.tx < 0.5 ? c.c0 : c.c1;
    const double x = lerp(grid.at(row, c.c0), grid.at(row, c.c1), c.tx).x;
    const double y = lerp(grid.at(c.r0, col), grid.at(c.r1, col), c.ty).y;
    return {x, y};
  }
  const NormCoord top = lerp(grid.at(c.r0, c.c0), grid.at(c.r0, c.c1), c.tx);
  const NormCoord bottom = lerp(grid.at(c.r1, c.c0), grid.at(c.r1, c.c1), c.tx);
  return lerp(top, bottom, c.ty);
}

InvertedPoint invert_point(PixelCoord q, const SamplingGrid& grid, Extent original, GridInterpolation mode) {
  const PixelCoord bounded{std::clamp(q.x, 0.0, grid.width() - 1.0), std::clamp(q.y, 0.0, grid.height() - 1.0)};
  const bool clamped = bounded.x != q.x || bounded.y != q.y;
  return {norm_to_pixel(sample_grid(grid, bounded, mode), original), clamped};
}

ForwardPoint forward_point(PixelCoord p, const SamplingGrid& grid, Extent original) {
  const NormCoord target = pixel_to_norm(p, original);
  const int h = grid.height();
  const int w = grid.width();
  auto dist2 = [&](int r, int c) {
    const NormCoord& g = grid.at(r, c);
    return (g.x - target.x) * (g.x - target.x) + (g.y - target.y) * (g.y - target.y);
  };

  // Coarse strided search, then an exhaustive window around the best node.
  const int stride = std::max(1, std::min(h, w) / 32);
  int best_r = 0;
  int best_c = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < h; r += stride) {
    for (int c = 0; c < w; c += stride) {
      if (const double d = dist2(r, c); d < best) best = d, best_r = r, best_c = c;
    }
  }
  const int r_lo = std::max(0, best_r - stride), r_hi = std::min(h - 1, best_r + stride);
  const int c_lo = std::max(0, best_c - stride), c_hi = std::min(w - 1, best_c + stride);
  for (int r = r_lo; r <= r_hi; ++r) {
    for (int c = c_lo; c <= c_hi; ++c) {
      if (const double d = dist2(r, c); d < best) best = d, best_r = r, best_c = c;
    }
  }

  PixelCoord q{static_cast<double>(best_c), static_cast<double>(best_r)};
  constexpr double kTolerance = 1e-13;
  for (int iter = 0; iter < 50; ++iter) {
    const NormCoord value = sample_grid(grid, q);
    const double fx = value.x - target.x;
    const double fy = value.y - target.y;
    if (fx * fx + fy * fy < kTolerance * kTolerance) {
      return {q, true};
    }
    const Cell c = locate(grid, q);
    const NormCoord g00 = grid.at(c.r0, c.c0), g01 = grid.at(c.r0, c.c1);
    const NormCoord g10 = grid.at(c.r1, c.c0), g11 = grid.at(c.r1, c.c1);
    const double jxx = (1 - c.ty) * (g01.x - g00.x) + c.ty * (g11.x - g10.x);
    const double jyx = (1 - c.ty) * (g01.y - g00.y) + c.ty * (g11.y - g10.y);
    const double jxy = (1 - c.tx) * (g10.x - g00.x) + c.tx * (g11.x - g01.x);
    const double jyy = (1 - c.tx) * (g10.y - g00.y) + c.tx * (g11.y - g01.y);
    const double det = jxx * jyy - jxy * jyx;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double dx = (jyy * fx - jxy * fy) / det;
    const double dy = (-jyx * fx + jxx * fy) / det;
    const PixelCoord next{std::clamp(q.x - dx, 0.0, w - 1.0), std::clamp(q.y - dy, 0.0, h - 1.0)};
    if (next == q) break;
    q = next;
  }
  const NormCoord value = sample_grid(grid, q);
  const double err = std::hypot(value.x - target.x, value.y - target.y);
  if (err < 1e-9) return {q, true};

  // Folded grids can trap the search in a local minimum: try every cell
  // whose node bounding box contains the target.
  PixelCoord best_q = q;
  double best_err = err;
  for (int r = 0; r + 1 < h; ++r) {
    for (int c = 0; c + 1 < w; ++c) {
      const NormCoord g00 = grid.at(r, c), g01 = grid.at(r, c + 1);
      const NormCoord g10 = grid.at(r + 1, c), g11 = grid.at(r + 1, c + 1);
      if (target.x < std::min({g00.x, g01.x, g10.x, g11.x}) || target.x > std::max({g00.x, g01.x, g10.x, g11.x}) ||
          target.y < std::min({g00.y, g01.y, g10.y, g11.y}) || target.y > std::max({g00.y, g01.y, g10.y, g11.y})) {
        continue;
      }
      double s = 0.5;
      double t = 0.5;
      for (int iter = 0; iter < 30; ++iter) {
        const double fx = (1 - t) * ((1 - s) * g00.x + s * g01.x) + t * ((1 - s) * g10.x + s * g11.x) - target.x;
        const double fy = (1 - t) * ((1 - s) * g00.y + s * g01.y) + t * ((1 - s) * g10.y + s * g11.y) - target.y;
        const double e = std::hypot(fx, fy);
        if (e < best_err) best_err = e, best_q = {c + s, r + t};
        if (e < kTolerance) return {best_q, true};
        const double jxx = (1 - t) * (g01.x - g00.x) + t * (g11.x - g10.x);
        const double jyx = (1 - t) * (g01.y - g00.y) + t * (g11.y - g10.y);
        const double jxy = (1 - s) * (g10.x - g00.x) + s * (g11.x - g01.x);
        const double jyy = (1 - s) * (g10.y - g00.y) + s * (g11.y - g01.y);
        const double det = jxx * jyy - jxy * jyx;
        if (det == 0.0 || !std::isfinite(det)) break;
        s = std::clamp(s - (jyy * fx - jxy * fy) / det, 0.0, 1.0);
        t = std::clamp(t - (-jyx * fx + jxx * fy) / det, 0.0, 1.0);
      }
    }
  }
  return {best_q, best_err < 1e-9};
}

InversionResult invert_detections(std::span<const Detection> dets, const SamplingGrid& grid, Extent original,
                                  GridInterpolation mode) {
  const std::uint64_t id = grid_fingerprint(grid);
  InversionResult out;
  out.detections.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.space.kind != SpaceKind::Resampled || d.space.grid_id != id) {
      throw GridMismatch("detection is not tagged with this grid");
    }
    std::array<PixelCoord, 4> mapped{};
    const auto src = corners(d.box);
    for (std::size_t k = 0; k < 4; ++k) mapped[k] = invert_point(src[k], grid, original, mode).point;
    const BoundingBox box = clamp_box(hull(mapped), original);
    if (!(box.x_min < box.x_max && box.y_min < box.y_max)) {
      ++out.dropped;
      continue;
    }
    out.detections.push_back({box, d.score, d.category, CoordinateSpace::original()});
  }
  return out;
}

InversionResult forward_detections(std::span<const Detection> dets, const SamplingGrid& grid, Extent original) {
  const auto space = CoordinateSpace::resampled(grid_fingerprint(grid));
  InversionResult out;
  out.detections.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.space.kind != SpaceKind::Original) throw InvalidInput("forward_detections expects Original-space boxes");
    std::array<PixelCoord, 4> mapped{};
    const auto src = corners(d.box);
    for (std::size_t k = 0; k < 4; ++k) mapped[k] = forward_point(src[k], grid, original).point;
    const BoundingBox box = clamp_box(hull(mapped), grid.extent());
    if (!(box.x_min < box.x_max && box.y_min < box.y_max)) {
      ++out.dropped;
      continue;
    }
    out.detections.push_back({box, d.score, d.category, space});
  }
  return out;
}

}  // namespace salisa
