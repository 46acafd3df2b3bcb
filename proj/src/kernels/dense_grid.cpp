#include <cmath>
#include <vector>

#include "salisa/kernels.hpp"

namespace salisa::kernels {

void tps_basis_row(std::span<const NormCoord> control, NormCoord q, std::span<double> row) {
  const std::size_t n = control.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = control[i].x - q.x;
    const double dy = control[i].y - q.y;
    const double r2 = dx * dx + dy * dy;
    // r^2 log r = 0.5 r^2 log r^2
    row[i] = r2 == 0.0 ? 0.0 : 0.5 * r2 * std::log(r2);
  }
  row[n] = 1.0;
  row[n + 1] = q.x;
  row[n + 2] = q.y;
}

namespace {

void dense_row(std::span<const NormCoord> control, const Eigen::MatrixX2d& W, int row, int height, int width,
               RowMatrixXd& block, Eigen::MatrixX2d& out) {
  const std::size_t cols = control.size() + 3;
  const double y = -1.0 + 2.0 * row / (height - 1);
  for (int j = 0; j < width; ++j) {
    tps_basis_row(control, {-1.0 + 2.0 * j / (width - 1), y}, std::span<double>(block.row(j).data(), cols));
  }
  out.middleRows(static_cast<Eigen::Index>(row) * width, width).noalias() = block * W;
}

}  // namespace

void dense_grid_serial(std::span<const NormCoord> control, const Eigen::MatrixX2d& W, int height, int width,
                       Eigen::MatrixX2d& out) {
  out.resize(static_cast<Eigen::Index>(height) * width, 2);
  RowMatrixXd block(width, static_cast<Eigen::Index>(control.size()) + 3);
  for (int i = 0; i < height; ++i) dense_row(control, W, i, height, width, block, out);
}

void dense_grid_omp(std::span<const NormCoord> control, const Eigen::MatrixX2d& W, int height, int width,
                    Eigen::MatrixX2d& out) {
  out.resize(static_cast<Eigen::Index>(height) * width, 2);
#pragma omp parallel
  {
    RowMatrixXd block(width, static_cast<Eigen::Index>(control.size()) + 3);
#pragma omp for schedule(static)
    for (int i = 0; i < height; ++i) dense_row(control, W, i, height, width, block, out);
  }
}

}  // namespace salisa::kernels
