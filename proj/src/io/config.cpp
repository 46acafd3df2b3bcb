#include "salisa/io/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "salisa/errors.hpp"
#include "salisa/io/atomic_write.hpp"

namespace salisa::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '"' && (k == 0 || s[k - 1] != '\\')) quoted = !quoted;
    if (s[k] == '#' && !quoted) return s.substr(0, k);
  }
  return s;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_number(std::string_view s, int line) {
  s = trim(s);
  std::string clean;
  for (char c : s) {
    if (c != '_') clean.push_back(c);
  }
  if (!clean.empty() && clean.front() == '+') clean.erase(0, 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), v);
  if (ec != std::errc() || ptr != clean.data() + clean.size() || clean.empty()) {
    fail(line, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

TomlValue parse_value(std::string_view s, int line) {
  s = trim(s);
  if (s.empty()) fail(line, "missing value");
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
      if (s[k] == '\\' && k + 2 < s.size()) {
        const char e = s[++k];
        out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
      } else {
        out.push_back(s[k]);
      }
    }
    return out;
  }
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, "unterminated array");
    std::vector<double> out;
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      out.push_back(parse_number(body.substr(0, comma), line));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return out;
  }
  return parse_number(s, line);
}

}  // namespace

std::map<std::string, TomlValue> parse_toml_subset(std::string_view text) {
  std::map<std::string, TomlValue> out;
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) fail(line_no, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, parse_value(line.substr(eq + 1), line_no)).second) {
      fail(line_no, "duplicate key '" + full + "'");
    }
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::map<std::string, TomlValue> values) : values_(std::move(values)) {}

  template <typename T>
  const T* get(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    const T* v = std::get_if<T>(&it->second);
    if (!v) throw ConfigError("wrong value type for '" + key + "'");
    return v;
  }

  void number(const std::string& key, double& dst) {
    if (const double* v = get<double>(key)) dst = *v;
  }
  void number(const std::string& key, float& dst) {
    if (const double* v = get<double>(key)) dst = static_cast<float>(*v);
  }
  void integer(const std::string& key, int& dst) {
    if (const double* v = get<double>(key)) {
      if (std::floor(*v) != *v || std::abs(*v) > 1e9) throw ConfigError("'" + key + "' must be an integer");
      dst = static_cast<int>(*v);
    }
  }
  void flag(const std::string& key, bool& dst) {
    if (const bool* v = get<bool>(key)) dst = *v;
  }
  void text(const std::string& key, std::string& dst) {
    if (const std::string* v = get<std::string>(key)) dst = *v;
  }
  void extent(const std::string& key, Extent& dst) {
    if (const auto* v = get<std::vector<double>>(key)) {
      if (v->size() != 2 || std::floor((*v)[0]) != (*v)[0] || std::floor((*v)[1]) != (*v)[1]) {
        throw ConfigError("'" + key + "' must be [width, height]");
      }
      dst = {static_cast<int>((*v)[1]), static_cast<int>((*v)[0])};
    }
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) throw ConfigError("unknown key '" + key + "'");
    }
  }

 private:
  std::map<std::string, TomlValue> values_;
  std::set<std::string> used_;
};

void read_detector(Reader& r, const std::string& prefix, DetectorSpec& spec) {
  r.text(prefix + "name", spec.name);
  std::string kind = to_string(spec.kind);
  r.text(prefix + "kind", kind);
  if (kind == "playback") {
    spec.kind = DetectorKind::AnnotationPlayback;
  } else if (kind == "external") {
    spec.kind = DetectorKind::ExternalCommand;
  } else if (kind == "null") {
    spec.kind = DetectorKind::Null;
  } else {
    throw ConfigError("unknown detector kind '" + kind + "'");
  }
  r.text(prefix + "source", spec.source);
  bool has_cost = false;
  if (const double* c = r.get<double>(prefix + "cost_gflops")) {
    spec.cost_gflops = *c;
    has_cost = true;
  }
  if (!has_cost) {
    if (const auto known = known_cost_gflops(spec.name)) spec.cost_gflops = *known;
  }
  r.number(prefix + "jitter_pct", spec.noise.jitter_pct);
  r.number(prefix + "drop_rate", spec.noise.drop_rate);
  r.number(prefix + "timeout_s", spec.timeout_s);
  spec.validate();
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  Reader r(parse_toml_subset(text));
  RunConfig cfg;
  if (const double* seed = r.get<double>("seed")) {
    if (*seed < 0 || std::floor(*seed) != *seed || *seed > 9007199254740992.0) {
      throw ConfigError("seed must be a non-negative integer");
    }
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }

  auto& p = cfg.pipeline;
  r.number("saliency.tau", p.saliency.tau);
  r.number("saliency.alpha_pct", p.saliency.alpha_pct);
  r.number("saliency.small_label", p.saliency.small_label);
  r.number("saliency.large_label", p.saliency.large_label);
  r.number("saliency.background_label", p.saliency.background_label);
  r.extent("saliency.out_size", p.saliency.out_size);

  r.number("attention.floor_eps", p.sampler.floor_eps);
  std::string mode = to_string(p.sampler.marginal_mode);
  r.text("attention.marginal_mode", mode);
  if (mode == "max") {
    p.sampler.marginal_mode = MarginalMode::Max;
  } else if (mode == "sum") {
    p.sampler.marginal_mode = MarginalMode::Sum;
  } else {
    throw ConfigError("attention.marginal_mode must be \"max\" or \"sum\"");
  }

  r.number("fit.ridge_lambda", p.fit.ridge_lambda);
  r.integer("fit.control_points", p.fit.control_points);
  r.extent("fit.working_size", p.fit.working_size);
  r.number("fit.gamma", p.fit.gamma);

  r.integer("schedule.keyframe_interval", p.schedule.keyframe_interval);
  r.flag("schedule.propagate_odd_frames", p.schedule.propagate_odd_frames);
  r.extent("schedule.resampled_size", p.schedule.resampled_size);

  r.number("costs.sampler_gflops", p.costs.sampler_gflops);

  read_detector(r, "detector.key.", cfg.key_detector);
  read_detector(r, "detector.light.", cfg.light_detector);
  r.reject_unknown();

  p.costs.key_gflops = cfg.key_detector.cost_gflops;
  p.costs.light_gflops = cfg.light_detector.cost_gflops;
  if (!(p.costs.sampler_gflops >= 0.0)) throw ConfigError("costs.sampler_gflops must be >= 0");
  p.saliency.validate();
  p.sampler.validate();
  p.fit.validate();
  p.schedule.validate();
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

std::string default_run_config_toml() {
  return R"(# Run configuration. Every key is optional; values shown are the defaults.

# Seed for all random draws (playback jitter / drops).
seed = 0

[saliency]
tau = 0.5               # detections with score >= tau enter the saliency map
alpha_pct = 0.5         # boxes smaller than this % of the frame are "small"
small_label = 1.0
large_label = 0.5
background_label = 0.0
out_size = [128, 128]   # [width, height] of the saliency map

[attention]
floor_eps = 0.01        # uniform density floor of the marginals
marginal_mode = "max"   # "max" or "sum" reduction of the map per axis

[fit]
ridge_lambda = 1e-6     # ridge term on the normalized normal equations
control_points = 256    # perfect square; 256 = 16x16 lattice
working_size = [64, 64] # [width, height] of the grid used in the least-squares fit
gamma = 0.5             # background weight for single-level maps

[schedule]
keyframe_interval = 16  # key frames at indices divisible by this
propagate_odd_frames = true # frames 2, 4, ... after a key frame reuse the previous detections
resampled_size = [640, 360] # [width, height] of the frames fed to the light detector

[costs]
sampler_gflops = 0.06

[detector.key]
name = "efficientdet-d1"
kind = "null"           # "playback", "external" or "null"
source = ""             # playback: annotation JSON relative to this file, or "synthetic"
                        # for the ground truth of `pipeline --synthetic`
                        # external: command template, {input} becomes the frame path
cost_gflops = 3.2
jitter_pct = 0.0
drop_rate = 0.0
timeout_s = 30.0

[detector.light]
name = "efficientdet-d0"
kind = "null"
source = ""
cost_gflops = 1.36
jitter_pct = 0.0
drop_rate = 0.0
timeout_s = 30.0
)";
}

}  // namespace salisa::io
