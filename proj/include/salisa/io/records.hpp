#pragma once

#include <string>
#include <vector>

#include "salisa/io/config.hpp"
#include "salisa/io/detection_file.hpp"
#include "salisa/pipeline.hpp"

namespace salisa::io {

/// One compact JSON object (no trailing newline) for frames.jsonl.
std::string frame_record_line(const FrameRecord& record);

/// Summary document: counts, costs and the configuration that produced them.
std::string summary_json(const PipelineSummary& summary, const RunConfig& config);

/// Original-space detections of every frame; image ids are frame indices.
DetectionFile records_to_detection_file(const std::vector<FrameRecord>& records, Extent frame_size);

}  // namespace salisa::io
