#include "salisa/grid_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <mutex>
#include <string>
#include <utility>

#include "salisa/errors.hpp"

namespace salisa {

WeightMask::WeightMask(int height, int width, std::vector<double> weights)
    : height_(height), width_(width), weights_(std::move(weights)) {
  if (height < 1 || width < 1 || weights_.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("WeightMask weights do not match its dimensions");
  }
  for (double v : weights_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("mask weights must be finite and >= 0");
  }
}

bool WeightMask::all_zero() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double v) { return v == 0.0; });
}

MaskTriple mask_triple(MapComposition composition, double gamma) {
  switch (composition) {
    case MapComposition::OnlySmall: return {1.0, 0.0, gamma};
    case MapComposition::OnlyLarge: return {0.0, 1.0, gamma};
    case MapComposition::Mixed: return {1.0, 0.0, 0.0};
    case MapComposition::Empty: break;
  }
  return {};
}

WeightMask build_mask(const SaliencyMap& map, MapComposition composition, double gamma, Extent out_size,
                      const SaliencyConfig& labels) {
  if (out_size.height < 2 || out_size.width < 2) throw DimensionError("mask needs dimensions >= 2");
  const MaskTriple triple = mask_triple(composition, gamma);
  const int h = out_size.height;
  const int w = out_size.width;
  std::vector<double> weights(static_cast<std::size_t>(h) * w, 0.0);
  if (composition == MapComposition::Empty) return WeightMask(h, w, std::move(weights));

  auto cell = [](int k, int len, int cells) {
    // identity coordinate -1 + 2k/(len-1) mapped to cell units
    const double t = static_cast<double>(k) / (len - 1) * cells;
    return std::clamp(static_cast<int>(std::floor(t)), 0, cells - 1);
  };
  for (int i = 0; i < h; ++i) {
    const int r = cell(i, h, map.height());
    for (int j = 0; j < w; ++j) {
      const float v = map.at(r, cell(j, w, map.width()));
      double weight = triple.background;
      if (v == labels.small_label) {
        weight = triple.small;
      } else if (v == labels.large_label) {
        weight = triple.large;
      }
      weights[static_cast<std::size_t>(i) * w + j] = weight;
    }
  }
  return WeightMask(h, w, std::move(weights));
}

namespace {

void require_same_shape(const SamplingGrid& G, const SamplingGrid& G_prime, const WeightMask& M) {
  if (G.extent() != G_prime.extent() || G.extent() != M.extent()) {
    throw DimensionError("loss_grid operands must share dimensions");
  }
}

template <typename CellTerm>
double weighted_mean(const SamplingGrid& G, const SamplingGrid& G_prime, const WeightMask& M, CellTerm term) {
  require_same_shape(G, G_prime, M);
  const auto a = G.coords();
  const auto b = G_prime.coords();
  const auto m = M.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (m[k] == 0.0) continue;
    const double dx = a[k].x - b[k].x;
    const double dy = a[k].y - b[k].y;
    sum += m[k] * term(dx * dx + dy * dy);
  }
  return sum / static_cast<double>(a.size());
}

}  // namespace

double loss_grid(const SamplingGrid& G, const SamplingGrid& G_prime, const WeightMask& M) {
  return weighted_mean(G, G_prime, M, [](double d2) { return d2; });
}

double loss_grid_unsquared(const SamplingGrid& G, const SamplingGrid& G_prime, const WeightMask& M) {
  return weighted_mean(G, G_prime, M, [](double d2) { return std::sqrt(d2); });
}

void FitConfig::validate() const {
  if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) throw ConfigError("ridge_lambda must be finite and >= 0");
  if (working_size.height < 2 || working_size.width < 2) throw ConfigError("working_size must be at least 2x2");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be finite and >= 0");
  try {
    ControlGrid{control_points};
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("control_points: ") + e.what());
  }
}

GridFitter::GridFitter(std::shared_ptr<const TpsSystem> system, Extent working_size)
    : system_(std::move(system)), working_(working_size) {
  const int n = system_->size();
  const Eigen::MatrixXd basis = dense_basis(system_->control_grid(), working_.height, working_.width);
  Eigen::MatrixXd selector = Eigen::MatrixXd::Zero(n + 3, n);
  selector.topRows(n).setIdentity();
  const Eigen::MatrixXd inv_cols = system_->apply_inverse(selector);
  const Eigen::MatrixXd B = basis * inv_cols;
  bt_ = B.transpose();
  g0_ = B * control_matrix(system_->control_grid());
}

FitResult GridFitter::fit(const SamplingGrid& G_prime, const WeightMask& M, double ridge_lambda) const {
  if (G_prime.extent() != working_ || M.extent() != working_) {
    throw DimensionError("fit operands must match the working size " + std::to_string(working_.height) + "x" +
                         std::to_string(working_.width));
  }
  if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) throw InvalidInput("ridge_lambda must be >= 0");
  const int n = system_->size();
  const Eigen::Index cells = working_.area();
  const auto target = G_prime.coords();

  Eigen::MatrixX2d delta = Eigen::MatrixX2d::Zero(n, 2);
  double condition = 1.0;
  if (!M.all_zero()) {
    Eigen::MatrixX2d r(cells, 2);
    for (Eigen::Index k = 0; k < cells; ++k) {
      r(k, 0) = target[k].x - g0_(k, 0);
      r(k, 1) = target[k].y - g0_(k, 1);
    }
    Eigen::MatrixXd A;
    Eigen::MatrixX2d b;
    kernels::normal_equations_omp(bt_, M.weights(), r, A, b);
    A /= static_cast<double>(cells);
    b /= static_cast<double>(cells);
    A.diagonal().array() += ridge_lambda;

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw IllConditioned("normal matrix is not positive definite");
    const double rcond = llt.rcond();
    condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(condition <= kMaxCondition)) {
      throw IllConditioned("normal matrix condition estimate " + std::to_string(condition) + " exceeds 1e14");
    }
    delta = llt.solve(b);
  }

  TpsModel model = solve_displacements(system_, delta);
  const Eigen::MatrixX2d linear = g0_ + bt_.transpose() * delta;
  const auto m = M.weights();
  double rss = 0.0;
  for (Eigen::Index k = 0; k < cells; ++k) {
    const double dx = linear(k, 0) - target[k].x;
    const double dy = linear(k, 1) - target[k].y;
    rss += m[k] * (dx * dx + dy * dy);
  }
  const SamplingGrid fitted = dense_grid(model, working_.height, working_.width);
  FitResult result{std::move(delta), std::move(model)};
  result.loss = loss_grid(fitted, G_prime, M);
  result.loss_unsquared = loss_grid_unsquared(fitted, G_prime, M);
  result.residual_norm = std::sqrt(rss);
  result.condition_estimate = condition;
  return result;
}

std::shared_ptr<const GridFitter> shared_fitter(int control_points, Extent working_size) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const GridFitter>> cache;
  const auto key = std::make_tuple(control_points, working_size.height, working_size.width);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto fitter = std::make_shared<const GridFitter>(shared_system(control_points), working_size);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(fitter)).first->second;
}

FitResult fit(const SamplingGrid& G_prime, const WeightMask& M, const FitConfig& cfg) {
  cfg.validate();
  return shared_fitter(cfg.control_points, G_prime.extent())->fit(G_prime, M, cfg.ridge_lambda);
}

std::size_t count_folds(const SamplingGrid& grid) {
  std::size_t folds = 0;
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      if (c + 1 < grid.width() && !(grid.at(r, c + 1).x > grid.at(r, c).x)) ++folds;
      if (r + 1 < grid.height() && !(grid.at(r + 1, c).y > grid.at(r, c).y)) ++folds;
    }
  }
  return folds;
}

SaliencyGridResult saliency_to_grid(const SaliencyMap& map, const FitConfig& cfg,
                                    const AttentionSamplerConfig& sampler_cfg, const SaliencyConfig& saliency_cfg,
                                    Extent out_size) {
  cfg.validate();
  if (out_size.height < 2 || out_size.width < 2) throw DimensionError("output grid needs dimensions >= 2");
  const MapComposition composition = map_composition(map, saliency_cfg);
  AttentionSamplerConfig working_sampler = sampler_cfg;
  working_sampler.out_size = cfg.working_size;
  const SamplingGrid reference = attention_grid(map, working_sampler);
  const WeightMask mask = build_mask(map, composition, cfg.gamma, cfg.working_size, saliency_cfg);
  FitResult fitted = fit(reference, mask, cfg);
  SamplingGrid grid = dense_grid(fitted.model, out_size.height, out_size.width);
  const std::size_t folds = count_folds(grid);
  return {std::move(grid), std::move(fitted), composition, folds};
}

}  // namespace salisa
