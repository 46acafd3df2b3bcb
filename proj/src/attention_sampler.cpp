#include "salisa/attention_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "salisa/errors.hpp"

namespace salisa {

const char* to_string(MarginalMode m) { return m == MarginalMode::Max ? "max" : "sum"; }

void AttentionSamplerConfig::validate() const {
  if (!(floor_eps > 0.0) || !std::isfinite(floor_eps)) throw ConfigError("floor_eps must be positive");
  if (out_size.height < 2 || out_size.width < 2) throw ConfigError("attention out_size must be at least 2x2");
}

double MarginalCdf::inverse(double u) const {
  const int n = bins();
  u = std::clamp(u, 0.0, 1.0);
  // first edge k+1 with cdf[k+1] >= u
  const auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), u);
  const int k = static_cast<int>(std::distance(cdf.begin(), it)) - 1;
  const double lo = cdf[k];
  const double hi = cdf[k + 1];
  const double t = k + (u - lo) / (hi - lo);
  return -1.0 + 2.0 * t / n;
}

double MarginalCdf::mass_below(double x) const {
  const int n = bins();
  const double t = std::clamp((x + 1.0) / 2.0 * n, 0.0, static_cast<double>(n));
  const int k = std::min(static_cast<int>(t), n - 1);
  return cdf[k] + (t - k) * (cdf[k + 1] - cdf[k]);
}

std::vector<double> marginal_density(const SaliencyMap& map, Axis axis, const AttentionSamplerConfig& cfg) {
  const int h = map.height();
  const int w = map.width();
  const int bins = axis == Axis::X ? w : h;
  std::vector<double> density(static_cast<std::size_t>(bins), 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double v = map.at(i, j);
      double& slot = density[static_cast<std::size_t>(axis == Axis::X ? j : i)];
      slot = cfg.marginal_mode == MarginalMode::Max ? std::max(slot, v) : slot + v;
    }
  }
  double total = 0.0;
  for (double& d : density) {
    d += cfg.floor_eps;
    total += d;
  }
  for (double& d : density) d /= total;
  return density;
}

namespace {

MarginalCdf make_cdf(const std::vector<double>& density, Axis axis) {
  MarginalCdf out;
  out.axis = axis;
  out.cdf.resize(density.size() + 1);
  out.cdf[0] = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k) out.cdf[k + 1] = out.cdf[k] + density[k];
  const double total = out.cdf.back();
  for (double& c : out.cdf) c /= total;
  out.cdf.back() = 1.0;
  return out;
}

}  // namespace

Marginals marginals(const SaliencyMap& map, const AttentionSamplerConfig& cfg) {
  cfg.validate();
  return {make_cdf(marginal_density(map, Axis::X, cfg), Axis::X),
          make_cdf(marginal_density(map, Axis::Y, cfg), Axis::Y)};
}

SamplingGrid attention_grid(const SaliencyMap& map, const AttentionSamplerConfig& cfg) {
  const Marginals m = marginals(map, cfg);
  const int h = cfg.out_size.height;
  const int w = cfg.out_size.width;
  std::vector<double> xs(static_cast<std::size_t>(w));
  std::vector<double> ys(static_cast<std::size_t>(h));
  for (int j = 0; j < w; ++j) xs[j] = m.x.inverse(static_cast<double>(j) / (w - 1));
  for (int i = 0; i < h; ++i) ys[i] = m.y.inverse(static_cast<double>(i) / (h - 1));
  std::vector<NormCoord> coords(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) coords[static_cast<std::size_t>(i) * w + j] = {xs[j], ys[i]};
  }
  return SamplingGrid(h, w, std::move(coords));
}

}  // namespace salisa
