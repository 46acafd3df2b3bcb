#include "salisa/io/records.hpp"

#include <cstdio>

#include <json.hpp>

namespace salisa::io {

using nlohmann::json;

namespace {

json extent_json(Extent e) { return json::array({e.width, e.height}); }

json detector_json(const DetectorSpec& d) {
  return {{"name", d.name},
          {"kind", to_string(d.kind)},
          {"cost_gflops", d.cost_gflops},
          {"jitter_pct", d.noise.jitter_pct},
          {"drop_rate", d.noise.drop_rate}};
}

}  // namespace

std::string frame_record_line(const FrameRecord& r) {
  json dets = json::array();
  for (const auto& d : r.detections) {
    const auto& b = d.box;
    dets.push_back({{"bbox", {b.x_min, b.y_min, b.width(), b.height()}}, {"score", d.score}, {"category_id", d.category}});
  }
  json j = {{"frame", r.index},
            {"role", to_string(r.role)},
            {"cost_gflops", r.cost_gflops},
            {"failed", r.failed},
            {"detections", std::move(dets)}};
  if (r.failed) j["error"] = r.error;
  if (r.grid_id) j["grid_id"] = format_grid_id(*r.grid_id);
  if (r.role == FrameRole::Resampled) j["dropped"] = r.dropped;
  if (r.composition) j["composition"] = to_string(*r.composition);
  if (r.fit_loss) j["fit_loss"] = *r.fit_loss;
  if (r.folds) j["folds"] = *r.folds;
  return j.dump();
}

std::string summary_json(const PipelineSummary& s, const RunConfig& c) {
  const auto& p = c.pipeline;
  json j = {
      {"frames", s.frames},
      {"key_frames", s.key_frames},
      {"resampled_frames", s.resampled_frames},
      {"propagated_frames", s.propagated_frames},
      {"failed_frames", s.failed_frames},
      {"total_gflops", s.total_gflops},
      {"mean_gflops", s.mean_gflops},
      {"config",
       {{"seed", c.seed},
        {"saliency",
         {{"tau", p.saliency.tau},
          {"alpha_pct", p.saliency.alpha_pct},
          {"labels", {p.saliency.small_label, p.saliency.large_label, p.saliency.background_label}},
          {"out_size", extent_json(p.saliency.out_size)}}},
        {"attention", {{"floor_eps", p.sampler.floor_eps}, {"marginal_mode", to_string(p.sampler.marginal_mode)}}},
        {"fit",
         {{"ridge_lambda", p.fit.ridge_lambda},
          {"control_points", p.fit.control_points},
          {"working_size", extent_json(p.fit.working_size)},
          {"gamma", p.fit.gamma}}},
        {"schedule",
         {{"keyframe_interval", p.schedule.keyframe_interval},
          {"propagate_odd_frames", p.schedule.propagate_odd_frames},
          {"resampled_size", extent_json(p.schedule.resampled_size)}}},
        {"costs", {{"sampler_gflops", p.costs.sampler_gflops}}},
        {"detector", {{"key", detector_json(c.key_detector)}, {"light", detector_json(c.light_detector)}}}}}};
  return j.dump(2) + "\n";
}

DetectionFile records_to_detection_file(const std::vector<FrameRecord>& records, Extent frame_size) {
  DetectionFile out;
  for (const auto& r : records) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d", r.index);
    out.images.push_back({r.index, name, frame_size.width, frame_size.height});
    for (const auto& d : r.detections) out.detections.push_back({r.index, d});
  }
  return out;
}

}  // namespace salisa::io
