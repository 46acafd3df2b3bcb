#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "salisa/attention_sampler.hpp"
#include "salisa/core_types.hpp"
#include "salisa/kernels.hpp"
#include "salisa/saliency.hpp"
#include "salisa/tps.hpp"

namespace salisa {

/// Per-cell supervision weights over a dense grid.
class WeightMask {
 public:
  WeightMask(int height, int width, std::vector<double> weights);

  int height() const { return height_; }
  int width() const { return width_; }
  Extent extent() const { return {height_, width_}; }
  double at(int row, int col) const { return weights_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const double> weights() const { return weights_; }
  bool all_zero() const;

 private:
  int height_;
  int width_;
  std::vector<double> weights_;
};

/// Weight triple (small, large, background) for a map composition:
/// OnlySmall (1,0,gamma), OnlyLarge (0,1,gamma), Mixed (1,0,0), Empty (0,0,0).
struct MaskTriple {
  double small = 0.0;
  double large = 0.0;
  double background = 0.0;
};

MaskTriple mask_triple(MapComposition composition, double gamma);

/// Nearest-neighbour lookup of the map's label class at each identity-grid
/// position of out_size, weighted by mask_triple().
WeightMask build_mask(const SaliencyMap& map, MapComposition composition, double gamma, Extent out_size,
                      const SaliencyConfig& labels = {});

/// sum_cells M * |G - G'|^2 / cells.
double loss_grid(const SamplingGrid& G, const SamplingGrid& G_prime, const WeightMask& M);
/// sum_cells M * |G - G'| / cells (un-squared, diagnostics only).
double loss_grid_unsquared(const SamplingGrid& G, const SamplingGrid& G_prime, const WeightMask& M);

struct FitConfig {
  /// Added to the diagonal of the normalized normal equations.
  double ridge_lambda = 1e-6;
  int control_points = 256;
  /// Resolution of the dense grid used for the least-squares system.
  Extent working_size{64, 64};
  /// Background weight for single-level saliency maps.
  double gamma = 0.5;

  void validate() const;
};

struct FitResult {
  /// Control displacements; displaced points = control points + delta.
  Eigen::MatrixX2d delta;
  TpsModel model;
  /// loss_grid() of the fitted (clamped) grid at the working resolution.
  double loss = 0.0;
  double loss_unsquared = 0.0;
  /// sqrt(sum M |G_lin - G'|^2) of the unclamped linear prediction.
  double residual_norm = 0.0;
  /// Condition estimate of the regularized normal matrix (1 for empty masks).
  double condition_estimate = 1.0;
};

/// Weighted ridge least squares for control displacements.
///
/// The dense grid is linear in the displacements: G = G0 + B delta with
/// B = L' L^{-1}[:, :n] and G0 = B P, so both axes share one n x n normal
/// matrix. B and G0 are precomputed per (control grid, working size).
class GridFitter {
 public:
  GridFitter(std::shared_ptr<const TpsSystem> system, Extent working_size);

  const TpsSystem& system() const { return *system_; }
  Extent working_size() const { return working_; }
  /// Dense grid for zero displacement (the identity up to rounding).
  const Eigen::MatrixX2d& base() const { return g0_; }
  /// B transposed, n x cells.
  const kernels::RowMatrixXd& design_transposed() const { return bt_; }

  FitResult fit(const SamplingGrid& G_prime, const WeightMask& M, double ridge_lambda) const;

  /// Above this condition estimate the fit throws IllConditioned.
  static constexpr double kMaxCondition = 1e14;

 private:
  std::shared_ptr<const TpsSystem> system_;
  Extent working_;
  kernels::RowMatrixXd bt_;
  Eigen::MatrixX2d g0_;
};

/// Shared fitter cache keyed by (control points, working size).
std::shared_ptr<const GridFitter> shared_fitter(int control_points, Extent working_size);

/// Fits at G_prime's resolution.
FitResult fit(const SamplingGrid& G_prime, const WeightMask& M, const FitConfig& cfg);

/// Adjacent node pairs whose coordinate fails to strictly increase along
/// its own axis (x along rows, y down columns). Zero for injective grids.
std::size_t count_folds(const SamplingGrid& grid);

struct SaliencyGridResult {
  SamplingGrid grid;
  FitResult fit;
  MapComposition composition = MapComposition::Empty;
  /// count_folds(grid); fitted grids are used as-is even when nonzero.
  std::size_t folds = 0;
};

/// composition -> attention grid -> mask -> fit -> dense grid at out_size.
/// An empty map yields the zero-displacement model and its (identity) grid.
SaliencyGridResult saliency_to_grid(const SaliencyMap& map, const FitConfig& cfg,
                                    const AttentionSamplerConfig& sampler_cfg, const SaliencyConfig& saliency_cfg,
                                    Extent out_size);

}  // namespace salisa
