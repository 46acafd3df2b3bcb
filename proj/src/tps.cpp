#include "salisa/tps.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "salisa/errors.hpp"
#include "salisa/kernels.hpp"

namespace salisa {

double radial_basis(double r) {
  if (!std::isfinite(r) || r < 0.0) throw DomainError("radial_basis needs a finite r >= 0, got " + std::to_string(r));
  if (r == 0.0) return 0.0;
  return r * r * std::log(r);
}

ControlGrid::ControlGrid(int n) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (n < 4 || side * side != n) {
    throw DimensionError("control point count must be a perfect square >= 4, got " + std::to_string(n));
  }
  side_ = side;
  points_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      points_.push_back({-1.0 + 2.0 * j / (side - 1), -1.0 + 2.0 * i / (side - 1)});
    }
  }
}

TpsSystem::TpsSystem(ControlGrid grid) : grid_(std::move(grid)) {
  const int n = grid_.size();
  const auto pts = grid_.points();
  k_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    k_(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double u = radial_basis(std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y));
      k_(i, j) = u;
      k_(j, i) = u;
    }
  }
  p_.resize(n, 3);
  for (int i = 0; i < n; ++i) p_.row(i) << 1.0, pts[i].x, pts[i].y;

  l_ = Eigen::MatrixXd::Zero(n + 3, n + 3);
  l_.topLeftCorner(n, n) = k_;
  l_.topRightCorner(n, 3) = p_;
  l_.bottomLeftCorner(3, n) = p_.transpose();

  lu_.compute(l_);
  const double rcond = lu_.rcond();
  if (!(rcond > 0.0) || !std::isfinite(rcond)) throw SingularSystem("TPS matrix L is singular");
  condition_ = 1.0 / rcond;
  l_inv_ = lu_.inverse();
}

Eigen::MatrixXd TpsSystem::apply_inverse(const Eigen::MatrixXd& rhs) const {
  if (condition_ > kDirectSolveCondition) return lu_.solve(rhs);
  return l_inv_ * rhs;
}

std::shared_ptr<const TpsSystem> build_system(const ControlGrid& grid) {
  return std::make_shared<const TpsSystem>(grid);
}

std::shared_ptr<const TpsSystem> shared_system(int control_points) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const TpsSystem>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[control_points];
  if (!slot) slot = build_system(ControlGrid(control_points));
  return slot;
}

TpsModel::TpsModel(std::shared_ptr<const TpsSystem> system, Eigen::MatrixX2d displaced, Eigen::MatrixX2d coefficients)
    : system_(std::move(system)), displaced_(std::move(displaced)), w_(std::move(coefficients)) {}

double TpsModel::bending_energy() const {
  const auto local_w = local();
  return (local_w.transpose() * system_->K() * local_w).trace();
}

Eigen::MatrixX2d control_matrix(const ControlGrid& grid) {
  Eigen::MatrixX2d m(grid.size(), 2);
  const auto pts = grid.points();
  for (int i = 0; i < grid.size(); ++i) m.row(i) << pts[i].x, pts[i].y;
  return m;
}

TpsModel solve(std::shared_ptr<const TpsSystem> system, const Eigen::MatrixX2d& displaced) {
  const int n = system->size();
  if (displaced.rows() != n) {
    throw DimensionError("expected " + std::to_string(n) + " displaced points, got " + std::to_string(displaced.rows()));
  }
  if (!displaced.allFinite()) throw InvalidInput("displaced control points must be finite");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
  rhs.topRows(n) = displaced;
  Eigen::MatrixX2d w = system->apply_inverse(rhs);
  return TpsModel(std::move(system), displaced, std::move(w));
}

TpsModel solve_displacements(std::shared_ptr<const TpsSystem> system, const Eigen::MatrixX2d& delta) {
  Eigen::MatrixX2d displaced = control_matrix(system->control_grid()) + delta;
  return solve(std::move(system), displaced);
}

NormCoord evaluate(const TpsModel& model, NormCoord q) {
  const auto& w = model.W();
  const int n = model.system().size();
  const auto pts = model.system().control_grid().points();
  double fx = w(n, 0) + w(n + 1, 0) * q.x + w(n + 2, 0) * q.y;
  double fy = w(n, 1) + w(n + 1, 1) * q.x + w(n + 2, 1) * q.y;
  for (int i = 0; i < n; ++i) {
    const double u = radial_basis(std::hypot(pts[i].x - q.x, pts[i].y - q.y));
    fx += w(i, 0) * u;
    fy += w(i, 1) * u;
  }
  return {fx, fy};
}

Eigen::MatrixX2d dense_values(const TpsModel& model, int height, int width) {
  if (height < 2 || width < 2) throw DimensionError("dense grid needs dimensions >= 2");
  Eigen::MatrixX2d out;
  kernels::dense_grid_omp(model.system().control_grid().points(), model.W(), height, width, out);
  return out;
}

SamplingGrid to_sampling_grid(const Eigen::MatrixX2d& values, int height, int width) {
  std::vector<NormCoord> coords(static_cast<std::size_t>(height) * width);
  bool clamped = false;
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    const double x = values(k, 0);
    const double y = values(k, 1);
    const double cx = std::clamp(x, -1.0, 1.0);
    const double cy = std::clamp(y, -1.0, 1.0);
    clamped = clamped || std::abs(cx - x) > kClampReportTolerance || std::abs(cy - y) > kClampReportTolerance;
    coords[static_cast<std::size_t>(k)] = {cx, cy};
  }
  return SamplingGrid(height, width, std::move(coords), clamped);
}

SamplingGrid dense_grid(const TpsModel& model, int height, int width) {
  return to_sampling_grid(dense_values(model, height, width), height, width);
}

Eigen::MatrixXd dense_basis(const ControlGrid& grid, int height, int width) {
  if (height < 2 || width < 2) throw DimensionError("dense basis needs dimensions >= 2");
  const int n = grid.size();
  kernels::RowMatrixXd basis(static_cast<Eigen::Index>(height) * width, n + 3);
  const auto pts = grid.points();
  for (int i = 0; i < height; ++i) {
    const double y = -1.0 + 2.0 * i / (height - 1);
    for (int j = 0; j < width; ++j) {
      const Eigen::Index k = static_cast<Eigen::Index>(i) * width + j;
      kernels::tps_basis_row(pts, {-1.0 + 2.0 * j / (width - 1), y},
                             std::span<double>(basis.row(k).data(), static_cast<std::size_t>(n + 3)));
    }
  }
  return basis;
}

}  // namespace salisa
