#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "salisa/detectors.hpp"
#include "salisa/pipeline.hpp"

namespace salisa::io {

/// Scalar or numeric-array value of the TOML subset used for run configs.
using TomlValue = std::variant<bool, double, std::string, std::vector<double>>;

/// Parses the subset: comments, [section] / [a.b] headers, and single-line
/// `key = value` pairs where value is a number, boolean, quoted string or a
/// flat array of numbers. Keys come back fully qualified ("fit.gamma").
std::map<std::string, TomlValue> parse_toml_subset(std::string_view text);

struct RunConfig {
  /// Seed for every random draw (playback noise); never taken from the clock.
  std::uint64_t seed = 0;
  PipelineConfig pipeline;
  DetectorSpec key_detector{"efficientdet-d1", DetectorKind::Null, "", 3.20, {}, 30.0};
  DetectorSpec light_detector{"efficientdet-d0", DetectorKind::Null, "", 1.36, {}, 30.0};
};

/// Unknown keys and wrongly typed values throw ConfigError. Detector costs
/// default to known_cost_gflops(name) when the name is known.
RunConfig parse_run_config(std::string_view text);
RunConfig read_run_config(const std::filesystem::path& path);

/// Annotated configuration listing every key at its default.
std::string default_run_config_toml();

}  // namespace salisa::io
