#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "salisa/core_types.hpp"

namespace salisa {

/// U(r) = r^2 log r with U(0) = 0 (natural log).
double radial_basis(double r);

/// Control points on a corner-aligned g x g lattice over [-1,1]^2, row-major.
class ControlGrid {
 public:
  explicit ControlGrid(int n = 256);

  int size() const { return static_cast<int>(points_.size()); }
  int side() const { return side_; }
  std::span<const NormCoord> points() const { return points_; }

 private:
  int side_;
  std::vector<NormCoord> points_;
};

/// K, P and the bordered matrix L = [[K, P], [P^T, 0]] for one control grid,
/// factorized and inverted once.
class TpsSystem {
 public:
  explicit TpsSystem(ControlGrid grid);

  const ControlGrid& control_grid() const { return grid_; }
  int size() const { return grid_.size(); }
  const Eigen::MatrixXd& K() const { return k_; }
  const Eigen::MatrixXd& P() const { return p_; }
  const Eigen::MatrixXd& L() const { return l_; }
  const Eigen::MatrixXd& L_inv() const { return l_inv_; }
  /// Reciprocal of the LU reciprocal-condition estimate of L.
  double condition_estimate() const { return condition_; }

  /// Returns L^{-1} V. Uses the cached inverse unless L is poorly conditioned,
  /// in which case the pivoted factorization is applied directly.
  Eigen::MatrixXd apply_inverse(const Eigen::MatrixXd& rhs) const;

  /// Above this condition estimate apply_inverse() goes through the LU.
  static constexpr double kDirectSolveCondition = 1e10;

 private:
  ControlGrid grid_;
  Eigen::MatrixXd k_;
  Eigen::MatrixXd p_;
  Eigen::MatrixXd l_;
  Eigen::MatrixXd l_inv_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
};

std::shared_ptr<const TpsSystem> build_system(const ControlGrid& grid);

/// Process-wide cache keyed by control-point count.
std::shared_ptr<const TpsSystem> shared_system(int control_points);

/// Fitted thin-plate spline. W rows 0..n-1 hold the local coefficients
/// (alpha_i, beta_i); rows n..n+2 the affine part (a1,a4), (a2,a5), (a3,a6)
/// so that f(q) = a1 + a2 x + a3 y + sum_i alpha_i U(|p_i - q|).
class TpsModel {
 public:
  TpsModel(std::shared_ptr<const TpsSystem> system, Eigen::MatrixX2d displaced, Eigen::MatrixX2d coefficients);

  const TpsSystem& system() const { return *system_; }
  const std::shared_ptr<const TpsSystem>& system_ptr() const { return system_; }
  const Eigen::MatrixX2d& displaced() const { return displaced_; }
  const Eigen::MatrixX2d& W() const { return w_; }
  auto local() const { return w_.topRows(system_->size()); }
  auto affine() const { return w_.bottomRows(3); }

  /// trace(W_local^T K W_local), summed over both output axes.
  double bending_energy() const;

 private:
  std::shared_ptr<const TpsSystem> system_;
  Eigen::MatrixX2d displaced_;
  Eigen::MatrixX2d w_;
};

/// Control points as an n x 2 matrix.
Eigen::MatrixX2d control_matrix(const ControlGrid& grid);

/// Solves L W = [V_dot; 0] for absolute displaced positions V_dot.
TpsModel solve(std::shared_ptr<const TpsSystem> system, const Eigen::MatrixX2d& displaced);

/// Same as solve() with V_dot = control points + delta.
TpsModel solve_displacements(std::shared_ptr<const TpsSystem> system, const Eigen::MatrixX2d& delta);

/// Pointwise evaluation of the spline.
NormCoord evaluate(const TpsModel& model, NormCoord q);

/// Evaluates the spline on every identity-grid coordinate as G = L' W, where
/// row k of L' is [U(|g_k - p_1|), ..., U(|g_k - p_n|), 1, x_k, y_k].
/// Coordinates leaving [-1,1] are clamped and the grid flagged.
SamplingGrid dense_grid(const TpsModel& model, int height, int width);

/// Unclamped dense evaluation, shared with the fitter.
Eigen::MatrixX2d dense_values(const TpsModel& model, int height, int width);

/// The L' matrix for the identity grid of the given size.
Eigen::MatrixXd dense_basis(const ControlGrid& grid, int height, int width);

/// Overshoot below this is rounding noise: still clamped, but not flagged.
inline constexpr double kClampReportTolerance = 1e-9;

/// Clamps raw values into [-1,1]; the grid is flagged when any value moved by
/// more than kClampReportTolerance.
SamplingGrid to_sampling_grid(const Eigen::MatrixX2d& values, int height, int width);

}  // namespace salisa
