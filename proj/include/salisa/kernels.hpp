#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP implementation used by
// the library and a serial reference kept for testing and benchmarking; the
// two produce bit-identical output.

#include <span>

#include <Eigen/Dense>

#include "salisa/core_types.hpp"

namespace salisa::kernels {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row of L' for query point q: n radial terms followed by [1, x, y].
void tps_basis_row(std::span<const NormCoord> control, NormCoord q, std::span<double> row);

/// out(k, :) = L'(k, :) * W for every identity-grid point k of a height x width grid.
void dense_grid_serial(std::span<const NormCoord> control, const Eigen::MatrixX2d& W, int height, int width,
                       Eigen::MatrixX2d& out);
void dense_grid_omp(std::span<const NormCoord> control, const Eigen::MatrixX2d& W, int height, int width,
                    Eigen::MatrixX2d& out);

/// Bilinear, clamp-to-edge sampling of src at every grid coordinate.
/// out must hold grid.height() * grid.width() * channels floats.
void warp_bilinear_serial(std::span<const float> src, Extent src_extent, int channels, const SamplingGrid& grid,
                          std::span<float> out);
void warp_bilinear_omp(std::span<const float> src, Extent src_extent, int channels, const SamplingGrid& grid,
                       std::span<float> out);

/// Weighted normal equations for a design matrix given transposed (n x cells,
/// row-major): A = Bt diag(w) Bt^T and b = Bt diag(w) r for the two residual
/// columns of r (cells x 2).
void normal_equations_serial(const RowMatrixXd& Bt, std::span<const double> weights, const Eigen::MatrixX2d& r,
                             Eigen::MatrixXd& A, Eigen::MatrixX2d& b);
void normal_equations_omp(const RowMatrixXd& Bt, std::span<const double> weights, const Eigen::MatrixX2d& r,
                          Eigen::MatrixXd& A, Eigen::MatrixX2d& b);

}  // namespace salisa::kernels
