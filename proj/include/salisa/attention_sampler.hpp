#pragma once

#include <vector>

#include "salisa/core_types.hpp"

namespace salisa {

enum class MarginalMode { Max, Sum };

const char* to_string(MarginalMode m);

struct AttentionSamplerConfig {
  /// Uniform density added to every bin before normalization.
  double floor_eps = 0.01;
  MarginalMode marginal_mode = MarginalMode::Max;
  Extent out_size{64, 64};

  void validate() const;
};

enum class Axis { X, Y };

/// Cumulative distribution over the n cells of one map axis. cdf has n+1
/// entries: cdf[0] = 0, cdf[n] = 1, strictly increasing. Bin edge k sits at
/// normalized coordinate -1 + 2k/n.
struct MarginalCdf {
  Axis axis = Axis::X;
  std::vector<double> cdf;

  int bins() const { return static_cast<int>(cdf.size()) - 1; }
  /// Normalized coordinate whose cumulative mass is u (u in [0,1]).
  double inverse(double u) const;
  /// Cumulative mass at normalized coordinate x (x in [-1,1]).
  double mass_below(double x) const;
};

struct Marginals {
  MarginalCdf x;
  MarginalCdf y;
};

/// Per-axis densities: X reduces over rows, Y over columns (max or sum per
/// cfg), then adds floor_eps and normalizes.
std::vector<double> marginal_density(const SaliencyMap& map, Axis axis, const AttentionSamplerConfig& cfg);

Marginals marginals(const SaliencyMap& map, const AttentionSamplerConfig& cfg);

/// Separable inverse-CDF grid: coordinate (i, j) = (F_x^-1(j/(w-1)), F_y^-1(i/(h-1)))
/// with (h, w) = cfg.out_size.
SamplingGrid attention_grid(const SaliencyMap& map, const AttentionSamplerConfig& cfg);

}  // namespace salisa
